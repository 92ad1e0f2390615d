#include <qenergy/error.hpp>
#include <qenergy/power_model.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace qenergy {

namespace {

std::size_t ladder_index(Component c) noexcept { return static_cast<std::size_t>(c); }

std::int64_t to_milliwatts(double watts) {
    if (!std::isfinite(watts) || watts < 0.0) {
        throw ModelError(fmt::format("power delta must be a finite non-negative wattage, got {}", watts));
    }
    return std::llround(watts * 1000.0);
}

double parse_number(std::string_view text, std::string_view label) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw ModelError(fmt::format("malformed setting label '{}'", label));
    }
    return value;
}

} // namespace

std::string_view to_string(DowngradeLevel level) noexcept {
    switch (level) {
    case DowngradeLevel::none: return "none";
    case DowngradeLevel::small: return "small";
    case DowngradeLevel::medium: return "medium";
    }
    return "none";
}

bool PvcSetting::is_stock() const noexcept {
    return underclock == 0.0 && downgrade.level == DowngradeLevel::none && downgrade.factor == 1.0 &&
           !pstate_cap.has_value();
}

std::string PvcSetting::label() const {
    if (is_stock()) {
        return "stock";
    }
    const double pct = underclock * 100.0;
    std::string out = std::abs(pct - std::round(pct)) < 1e-9 ? fmt::format("u{}", std::llround(pct))
                                                              : fmt::format("u{:g}", pct);
    switch (downgrade.level) {
    case DowngradeLevel::none: break;
    case DowngradeLevel::small: out += "-small"; break;
    case DowngradeLevel::medium: out += "-med"; break;
    }
    if (pstate_cap) {
        out += fmt::format("-cap{}", *pstate_cap);
    }
    return out;
}

CpuModel::CpuModel(Hertz fsb_base, std::vector<PState> pstates, double activity_constant, Watts idle_power,
                   DowngradePresets presets)
    : fsb_base_(fsb_base)
    , pstates_(std::move(pstates))
    , activity_constant_(activity_constant)
    , idle_power_(idle_power)
    , presets_(presets) {
    if (!(fsb_base_.value() > 0.0)) {
        throw ModelError("fsb_base must be positive");
    }
    if (!(activity_constant_ > 0.0)) {
        throw ModelError("activity_constant must be positive");
    }
    if (!(idle_power_.value() >= 0.0)) {
        throw ModelError("idle_power must be non-negative");
    }
    if (pstates_.empty()) {
        throw ModelError("CPU needs at least one p-state");
    }
    for (std::size_t i = 0; i < pstates_.size(); ++i) {
        const auto& ps = pstates_[i];
        if (ps.multiplier < 1) {
            throw ModelError(fmt::format("p-state multiplier must be >= 1, got {}", ps.multiplier));
        }
        if (!(ps.core_voltage.value() > 0.0)) {
            throw ModelError(fmt::format("p-state {} has non-positive voltage", ps.multiplier));
        }
        if (i > 0) {
            const auto& prev = pstates_[i - 1];
            if (ps.multiplier >= prev.multiplier) {
                throw ModelError("p-state multipliers must be strictly decreasing");
            }
            if (ps.core_voltage > prev.core_voltage) {
                throw ModelError("p-state voltage must not increase as the multiplier decreases");
            }
        }
    }
    if (!(presets_.medium > 0.0 && presets_.medium <= presets_.small && presets_.small <= 1.0)) {
        throw ModelError(fmt::format("downgrade presets must satisfy 0 < medium <= small <= 1 (small={}, medium={})",
                                     presets_.small, presets_.medium));
    }
}

VoltageDowngrade CpuModel::downgrade(DowngradeLevel level) const noexcept {
    switch (level) {
    case DowngradeLevel::none: return {};
    case DowngradeLevel::small: return {DowngradeLevel::small, presets_.small};
    case DowngradeLevel::medium: return {DowngradeLevel::medium, presets_.medium};
    }
    return {};
}

bool CpuModel::has_multiplier(int multiplier) const noexcept {
    return std::any_of(pstates_.begin(), pstates_.end(), [&](const PState& p) { return p.multiplier == multiplier; });
}

void validate_setting(const CpuModel& cpu, const PvcSetting& setting) {
    if (!(setting.underclock >= 0.0 && setting.underclock < 1.0)) {
        throw ModelError(fmt::format("underclock fraction must lie in [0, 1), got {}", setting.underclock));
    }
    if (!(setting.downgrade.factor > 0.0 && setting.downgrade.factor <= 1.0)) {
        throw ModelError(fmt::format("voltage factor must lie in (0, 1], got {}", setting.downgrade.factor));
    }
    if (setting.downgrade.level == DowngradeLevel::none && setting.downgrade.factor != 1.0) {
        throw ModelError("downgrade level 'none' requires factor 1.0");
    }
    if (setting.pstate_cap && !cpu.has_multiplier(*setting.pstate_cap)) {
        throw ModelError(fmt::format("p-state cap {} is not a multiplier of this CPU", *setting.pstate_cap));
    }
}

PvcSetting parse_setting_label(std::string_view label, const CpuModel& cpu) {
    if (label == "stock") {
        return PvcSetting::stock();
    }
    PvcSetting setting;
    std::string_view rest = label;
    if (const auto cap_pos = rest.find("-cap"); cap_pos != std::string_view::npos) {
        setting.pstate_cap = static_cast<int>(parse_number(rest.substr(cap_pos + 4), label));
        rest = rest.substr(0, cap_pos);
    }
    if (rest.empty() || rest.front() != 'u') {
        throw ModelError(fmt::format("malformed setting label '{}'", label));
    }
    rest.remove_prefix(1);
    const auto dash = rest.find('-');
    setting.underclock = parse_number(rest.substr(0, dash), label) / 100.0;
    if (dash != std::string_view::npos) {
        const auto level = rest.substr(dash + 1);
        if (level == "small") {
            setting.downgrade = cpu.downgrade(DowngradeLevel::small);
        } else if (level == "med" || level == "medium") {
            setting.downgrade = cpu.downgrade(DowngradeLevel::medium);
        } else {
            throw ModelError(fmt::format("unknown voltage downgrade in setting label '{}'", label));
        }
    }
    validate_setting(cpu, setting);
    return setting;
}

Hertz effective_fsb(const CpuModel& cpu, const PvcSetting& setting) {
    validate_setting(cpu, setting);
    return cpu.fsb_base() * (1.0 - setting.underclock);
}

Hertz effective_frequency(const CpuModel& cpu, const PState& pstate, const PvcSetting& setting) {
    const auto ps = cpu.pstates();
    if (std::find(ps.begin(), ps.end(), pstate) == ps.end()) {
        throw ModelError(fmt::format("p-state with multiplier {} is not part of this CPU", pstate.multiplier));
    }
    if (setting.pstate_cap && pstate.multiplier > *setting.pstate_cap) {
        throw ModelError(
            fmt::format("p-state {} exceeds the configured cap {}", pstate.multiplier, *setting.pstate_cap));
    }
    return effective_fsb(cpu, setting) * static_cast<double>(pstate.multiplier);
}

std::vector<PState> available_pstates(const CpuModel& cpu, const PvcSetting& setting) {
    validate_setting(cpu, setting);
    std::vector<PState> out;
    for (const auto& ps : cpu.pstates()) {
        if (!setting.pstate_cap || ps.multiplier <= *setting.pstate_cap) {
            out.push_back(ps);
        }
    }
    return out;
}

PState operating_pstate(const CpuModel& cpu, const PvcSetting& setting) {
    // p-states are ordered fastest first, and the cap is always a listed multiplier
    return available_pstates(cpu, setting).front();
}

Volts effective_voltage(const PState& pstate, const PvcSetting& setting) noexcept {
    return pstate.core_voltage * setting.downgrade.factor;
}

Watts cpu_active_power(const CpuModel& cpu, const PState& pstate, const PvcSetting& setting) {
    const double v = effective_voltage(pstate, setting).value();
    const double f = effective_frequency(cpu, pstate, setting).value();
    return Watts{cpu.activity_constant() * v * v * f};
}

std::string_view to_string(AccessPattern pattern) noexcept {
    return pattern == AccessPattern::sequential ? "sequential" : "random";
}

AccessPattern parse_access_pattern(std::string_view text) {
    if (text == "sequential") {
        return AccessPattern::sequential;
    }
    if (text == "random") {
        return AccessPattern::random;
    }
    throw ModelError(fmt::format("unknown access pattern '{}'", text));
}

DiskModel::DiskModel(Seconds seek_time, double transfer_rate_kb_s, Watts active_power, Watts idle_power)
    : seek_time_(seek_time)
    , transfer_rate_kb_s_(transfer_rate_kb_s)
    , active_power_(active_power)
    , idle_power_(idle_power) {
    if (!(seek_time_.value() >= 0.0)) {
        throw ModelError("seek_time must be non-negative");
    }
    if (!(transfer_rate_kb_s_ > 0.0)) {
        throw ModelError("transfer_rate must be positive");
    }
    if (!(idle_power_.value() >= 0.0 && active_power_ >= idle_power_)) {
        throw ModelError("disk power must satisfy active >= idle >= 0");
    }
}

DiskReport disk_read_sim(const DiskModel& disk, AccessPattern pattern, std::uint64_t block_kb,
                         std::uint64_t total_kb) {
    if (block_kb == 0 || total_kb == 0) {
        throw ModelError("disk reads need a positive block size and total");
    }
    if (total_kb % block_kb != 0) {
        throw ModelError(fmt::format("total {} KB is not a multiple of the {} KB block", total_kb, block_kb));
    }
    const double total = static_cast<double>(total_kb);
    Seconds elapsed{total / disk.transfer_rate_kb_s()};
    if (pattern == AccessPattern::random) {
        elapsed += disk.seek_time() * static_cast<double>(total_kb / block_kb);
    }
    DiskReport report;
    report.elapsed = elapsed;
    report.energy = disk.active_power() * elapsed;
    report.throughput_kb_s = total / elapsed.value();
    report.energy_per_kb = report.energy.value() / total;
    return report;
}

std::string_view to_string(Component c) noexcept {
    switch (c) {
    case Component::psu_mobo: return "psu_mobo";
    case Component::sys_on: return "sys_on";
    case Component::cpu: return "cpu";
    case Component::ram1: return "ram1";
    case Component::ram2: return "ram2";
    case Component::gpu: return "gpu";
    }
    return "?";
}

SystemPowerTable SystemPowerTable::from_deltas(std::span<const double> deltas_w) {
    if (deltas_w.size() != kComponentLadder.size()) {
        throw ModelError(fmt::format("expected {} component deltas, got {}", kComponentLadder.size(), deltas_w.size()));
    }
    SystemPowerTable table;
    for (std::size_t i = 0; i < deltas_w.size(); ++i) {
        table.delta_mw_[i] = to_milliwatts(deltas_w[i]);
    }
    return table;
}

SystemPowerTable SystemPowerTable::from_ladder(std::span<const double> measured_w) {
    if (measured_w.size() != kComponentLadder.size()) {
        throw ModelError(
            fmt::format("expected {} ladder readings, got {}", kComponentLadder.size(), measured_w.size()));
    }
    SystemPowerTable table;
    std::int64_t previous = 0;
    for (std::size_t i = 0; i < measured_w.size(); ++i) {
        const auto reading = to_milliwatts(measured_w[i]);
        if (reading < previous) {
            throw ModelError("ladder readings must be non-decreasing");
        }
        table.delta_mw_[i] = reading - previous;
        previous = reading;
    }
    return table;
}

std::int64_t SystemPowerTable::delta_milliwatts(Component c) const noexcept { return delta_mw_[ladder_index(c)]; }

Watts SystemPowerTable::delta(Component c) const noexcept {
    return Watts{static_cast<double>(delta_milliwatts(c)) / 1000.0};
}

Watts SystemPowerTable::ladder_reading(std::size_t steps) const {
    if (steps > kComponentLadder.size()) {
        throw ModelError("ladder has only six steps");
    }
    std::set<Component> enabled(kComponentLadder.begin(), kComponentLadder.begin() + static_cast<long>(steps));
    return system_baseline_power(*this, enabled);
}

std::optional<Component> prerequisite(Component c) noexcept {
    switch (c) {
    case Component::psu_mobo: return std::nullopt;
    case Component::sys_on: return Component::psu_mobo;
    case Component::cpu: return Component::sys_on;
    case Component::ram1: return Component::cpu;
    case Component::ram2: return Component::ram1;
    case Component::gpu: return Component::cpu;
    }
    return std::nullopt;
}

std::int64_t system_baseline_milliwatts(const SystemPowerTable& table, const std::set<Component>& enabled) {
    std::int64_t total = 0;
    for (const auto c : enabled) {
        if (const auto pre = prerequisite(c); pre && !enabled.contains(*pre)) {
            throw ModelError(fmt::format("component '{}' requires '{}'", to_string(c), to_string(*pre)));
        }
        total += table.delta_milliwatts(c);
    }
    return total;
}

Watts system_baseline_power(const SystemPowerTable& table, const std::set<Component>& enabled) {
    return Watts{static_cast<double>(system_baseline_milliwatts(table, enabled)) / 1000.0};
}

Watts wall_power(Watts dc_power, double psu_efficiency) {
    if (!(psu_efficiency > 0.0 && psu_efficiency <= 1.0)) {
        throw ModelError(fmt::format("PSU efficiency must lie in (0, 1], got {}", psu_efficiency));
    }
    if (!(dc_power.value() >= 0.0)) {
        throw ModelError("DC power must be non-negative");
    }
    return dc_power / psu_efficiency;
}

} // namespace qenergy
