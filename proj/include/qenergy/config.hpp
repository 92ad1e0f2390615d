#pragma once

#include <qenergy/engine.hpp>
#include <qenergy/power_model.hpp>

#include <json.hpp>

#include <filesystem>
#include <string_view>

namespace qenergy {

/// Machine description shared by every experiment.
struct HardwareConfig {
    CpuModel cpu;
    DiskModel disk;
    SystemPowerTable system;
    double psu_efficiency = 0.83;
};

/// Reads a JSON document; ConfigError on I/O or syntax failure.
[[nodiscard]] nlohmann::json read_json_file(const std::filesystem::path& path);

/// `cpu` keys: fsb_base_mhz, pstates[].multiplier, pstates[].voltage,
/// downgrade_small, downgrade_medium, activity_constant (default 1.0),
/// idle_power_w (default 0).
[[nodiscard]] CpuModel parse_cpu(const nlohmann::json& section);

/// `disk` keys: seek_time_ms, transfer_rate_mb_s, disk_active_power_w,
/// disk_idle_power_w (default 0).
[[nodiscard]] DiskModel parse_disk(const nlohmann::json& section);

/// `system` keys: ladder_w (six cumulative readings) or deltas_w.
[[nodiscard]] SystemPowerTable parse_system(const nlohmann::json& section);

/// `costs` keys: cycles_scan_per_row, cycles_per_predicate_term_per_row,
/// cycles_split_per_result_row, fixed_overhead_time_s,
/// fixed_overhead_energy_j, buffer_state ("warm" | "cold").
[[nodiscard]] CostParams parse_costs(const nlohmann::json& section);

/// Top-level sections `cpu`, `disk`, `system` and optional `psu_efficiency`.
[[nodiscard]] HardwareConfig parse_hardware_config(const nlohmann::json& doc);
[[nodiscard]] HardwareConfig load_hardware_config(const std::filesystem::path& path);

} // namespace qenergy
