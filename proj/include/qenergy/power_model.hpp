#pragma once

#include <qenergy/units.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qenergy {

/// @brief One processor performance state.
///
/// The clock is `multiplier x FSB`; `core_voltage` is the stock voltage the
/// processor uses at this multiplier.
struct PState {
    int multiplier = 1;
    Volts core_voltage{1.0};

    friend bool operator==(const PState&, const PState&) = default;
};

enum class DowngradeLevel { none, small, medium };

[[nodiscard]] std::string_view to_string(DowngradeLevel level) noexcept;

/// A preset voltage reduction. `factor` multiplies the stock p-state voltage.
struct VoltageDowngrade {
    DowngradeLevel level = DowngradeLevel::none;
    double factor = 1.0;

    friend bool operator==(const VoltageDowngrade&, const VoltageDowngrade&) = default;
};

/// @brief One point of a processor voltage/frequency sweep.
///
/// `underclock` is the fraction u by which the front-side bus is slowed
/// (0 <= u < 1). Underclocking keeps every multiplier; `pstate_cap` is the
/// coarser alternative that removes the multipliers above the cap.
struct PvcSetting {
    double underclock = 0.0;
    VoltageDowngrade downgrade{};
    std::optional<int> pstate_cap;

    [[nodiscard]] static PvcSetting stock() noexcept { return {}; }
    [[nodiscard]] bool is_stock() const noexcept;

    /// "stock", "u5-small", "u10-med", with "-cap7" appended when capped.
    [[nodiscard]] std::string label() const;

    friend bool operator==(const PvcSetting&, const PvcSetting&) = default;
};

/// Voltage factors applied when a setting names a preset without an explicit
/// calibrated factor.
struct DowngradePresets {
    double small = 1.0;
    double medium = 1.0;
};

/// @brief Processor model: p-state table, bus clock and the CV^2F constant.
///
/// Invariants (checked on construction): fsb_base > 0, activity_constant > 0,
/// idle_power >= 0, p-states non-empty with strictly decreasing multipliers
/// and non-increasing voltages, and 0 < medium <= small <= 1.
class CpuModel {
public:
    CpuModel(Hertz fsb_base, std::vector<PState> pstates, double activity_constant, Watts idle_power,
             DowngradePresets presets = {});

    [[nodiscard]] Hertz fsb_base() const noexcept { return fsb_base_; }
    [[nodiscard]] std::span<const PState> pstates() const noexcept { return pstates_; }
    [[nodiscard]] double activity_constant() const noexcept { return activity_constant_; }
    [[nodiscard]] Watts idle_power() const noexcept { return idle_power_; }
    [[nodiscard]] const DowngradePresets& presets() const noexcept { return presets_; }

    [[nodiscard]] VoltageDowngrade downgrade(DowngradeLevel level) const noexcept;
    [[nodiscard]] bool has_multiplier(int multiplier) const noexcept;

    friend bool operator==(const CpuModel&, const CpuModel&) = default;

private:
    Hertz fsb_base_;
    std::vector<PState> pstates_;
    double activity_constant_;
    Watts idle_power_;
    DowngradePresets presets_;
};

/// Throws ModelError unless `setting` is legal for `cpu`.
void validate_setting(const CpuModel& cpu, const PvcSetting& setting);

/// Parses "stock", "u{pct}-small", "u{pct}-med" (optionally "-cap{m}"),
/// taking downgrade factors from the CPU presets.
[[nodiscard]] PvcSetting parse_setting_label(std::string_view label, const CpuModel& cpu);

[[nodiscard]] Hertz effective_fsb(const CpuModel& cpu, const PvcSetting& setting);

/// multiplier x effective FSB. Throws if `pstate` is not one of the CPU's
/// p-states or lies above the setting's cap.
[[nodiscard]] Hertz effective_frequency(const CpuModel& cpu, const PState& pstate, const PvcSetting& setting);

[[nodiscard]] std::vector<PState> available_pstates(const CpuModel& cpu, const PvcSetting& setting);

/// The fastest p-state the setting allows; the simulator runs work there.
[[nodiscard]] PState operating_pstate(const CpuModel& cpu, const PvcSetting& setting);

[[nodiscard]] Volts effective_voltage(const PState& pstate, const PvcSetting& setting) noexcept;

/// C * V^2 * F at the effective voltage and frequency.
[[nodiscard]] Watts cpu_active_power(const CpuModel& cpu, const PState& pstate, const PvcSetting& setting);

// ---------------------------------------------------------------------------
// Disk

enum class AccessPattern { sequential, random };

[[nodiscard]] std::string_view to_string(AccessPattern pattern) noexcept;
[[nodiscard]] AccessPattern parse_access_pattern(std::string_view text);

/// Mean-value disk: one seek per random block, a fixed transfer rate, and a
/// single active power while servicing reads.
class DiskModel {
public:
    DiskModel(Seconds seek_time, double transfer_rate_kb_s, Watts active_power, Watts idle_power);

    [[nodiscard]] Seconds seek_time() const noexcept { return seek_time_; }
    [[nodiscard]] double transfer_rate_kb_s() const noexcept { return transfer_rate_kb_s_; }
    [[nodiscard]] Watts active_power() const noexcept { return active_power_; }
    [[nodiscard]] Watts idle_power() const noexcept { return idle_power_; }

    friend bool operator==(const DiskModel&, const DiskModel&) = default;

private:
    Seconds seek_time_;
    double transfer_rate_kb_s_;
    Watts active_power_;
    Watts idle_power_;
};

struct DiskReport {
    Seconds elapsed{};
    Joules energy{};
    double throughput_kb_s = 0.0;
    double energy_per_kb = 0.0;
};

/// Reads `total_kb` in `block_kb` calls. Sequential reads pay transfer time
/// only; random reads pay one seek per block on top of it.
[[nodiscard]] DiskReport disk_read_sim(const DiskModel& disk, AccessPattern pattern, std::uint64_t block_kb,
                                       std::uint64_t total_kb);

// ---------------------------------------------------------------------------
// Whole-system idle power

enum class Component { psu_mobo, sys_on, cpu, ram1, ram2, gpu };

inline constexpr std::array<Component, 6> kComponentLadder{Component::psu_mobo, Component::sys_on, Component::cpu,
                                                           Component::ram1,     Component::ram2,   Component::gpu};

[[nodiscard]] std::string_view to_string(Component c) noexcept;

/// @brief Per-component wall-power deltas, stored in integer milliwatts so
/// that ladder sums reproduce measured readings exactly.
class SystemPowerTable {
public:
    /// Deltas in ladder order (psu_mobo, sys_on, cpu, ram1, ram2, gpu).
    static SystemPowerTable from_deltas(std::span<const double> deltas_w);
    /// Cumulative readings taken while building the machine up, in ladder order.
    static SystemPowerTable from_ladder(std::span<const double> measured_w);

    [[nodiscard]] std::int64_t delta_milliwatts(Component c) const noexcept;
    [[nodiscard]] Watts delta(Component c) const noexcept;

    /// Cumulative reading after enabling the first `steps` ladder components.
    [[nodiscard]] Watts ladder_reading(std::size_t steps) const;

private:
    std::array<std::int64_t, 6> delta_mw_{};
};

/// Component that must be enabled before `c` can be, if any.
[[nodiscard]] std::optional<Component> prerequisite(Component c) noexcept;

[[nodiscard]] std::int64_t system_baseline_milliwatts(const SystemPowerTable& table,
                                                      const std::set<Component>& enabled);
[[nodiscard]] Watts system_baseline_power(const SystemPowerTable& table, const std::set<Component>& enabled);

/// DC draw seen at the wall through a PSU of the given efficiency.
[[nodiscard]] Watts wall_power(Watts dc_power, double psu_efficiency);

} // namespace qenergy
