#include <qenergy/config.hpp>
#include <qenergy/error.hpp>

#include <fmt/format.h>

#include <cmath>
#include <fstream>

namespace qenergy {

namespace {

using nlohmann::json;

const json& require(const json& section, std::string_view key, std::string_view where) {
    if (!section.is_object() || !section.contains(key)) {
        throw ConfigError(fmt::format("missing key '{}.{}'", where, key));
    }
    return section.at(std::string(key));
}

double number(const json& section, std::string_view key, std::string_view where) {
    const auto& v = require(section, key, where);
    if (!v.is_number()) {
        throw ConfigError(fmt::format("key '{}.{}' must be a number", where, key));
    }
    return v.get<double>();
}

double number_or(const json& section, std::string_view key, std::string_view where, double fallback) {
    if (!section.is_object() || !section.contains(key)) {
        return fallback;
    }
    return number(section, key, where);
}

template <class F>
auto build(std::string_view where, F&& make) {
    try {
        return make();
    } catch (const ModelError& e) {
        throw ConfigError(fmt::format("invalid '{}' section: {}", where, e.what()));
    }
}

} // namespace

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    }
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
}

CpuModel parse_cpu(const json& section) {
    const auto& list = require(section, "pstates", "cpu");
    if (!list.is_array()) {
        throw ConfigError("key 'cpu.pstates' must be an array");
    }
    std::vector<PState> pstates;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto where = fmt::format("cpu.pstates[{}]", i);
        const double m = number(list[i], "multiplier", where);
        if (m != std::floor(m)) {
            throw ConfigError(fmt::format("key '{}.multiplier' must be an integer", where));
        }
        pstates.push_back(PState{static_cast<int>(m), Volts{number(list[i], "voltage", where)}});
    }
    const DowngradePresets presets{number_or(section, "downgrade_small", "cpu", 1.0),
                                   number_or(section, "downgrade_medium", "cpu", 1.0)};
    return build("cpu", [&] {
        return CpuModel(megahertz(number(section, "fsb_base_mhz", "cpu")), std::move(pstates),
                        number_or(section, "activity_constant", "cpu", 1.0),
                        Watts{number_or(section, "idle_power_w", "cpu", 0.0)}, presets);
    });
}

DiskModel parse_disk(const json& section) {
    return build("disk", [&] {
        return DiskModel(Seconds{number(section, "seek_time_ms", "disk") / 1000.0},
                         number(section, "transfer_rate_mb_s", "disk") * 1024.0,
                         Watts{number(section, "disk_active_power_w", "disk")},
                         Watts{number_or(section, "disk_idle_power_w", "disk", 0.0)});
    });
}

SystemPowerTable parse_system(const json& section) {
    const bool ladder = section.is_object() && section.contains("ladder_w");
    const auto& list = require(section, ladder ? "ladder_w" : "deltas_w", "system");
    if (!list.is_array()) {
        throw ConfigError("system power readings must be an array");
    }
    std::vector<double> watts;
    for (const auto& v : list) {
        if (!v.is_number()) {
            throw ConfigError("system power readings must be numbers");
        }
        watts.push_back(v.get<double>());
    }
    return build("system", [&] {
        return ladder ? SystemPowerTable::from_ladder(watts) : SystemPowerTable::from_deltas(watts);
    });
}

CostParams parse_costs(const json& section) {
    CostParams c;
    c.cycles_scan_per_row = number(section, "cycles_scan_per_row", "costs");
    c.cycles_per_predicate_term_per_row = number(section, "cycles_per_predicate_term_per_row", "costs");
    c.cycles_split_per_result_row = number(section, "cycles_split_per_result_row", "costs");
    c.fixed_overhead_time_per_query = Seconds{number_or(section, "fixed_overhead_time_s", "costs", 0.0)};
    c.fixed_overhead_energy_per_query = Joules{number_or(section, "fixed_overhead_energy_j", "costs", 0.0)};
    if (section.contains("buffer_state")) {
        if (!section.at("buffer_state").is_string()) {
            throw ConfigError("key 'costs.buffer_state' must be a string");
        }
        const auto state = section.at("buffer_state").get<std::string>();
        if (state != "warm" && state != "cold") {
            throw ConfigError(fmt::format("key 'costs.buffer_state' must be warm or cold, got '{}'", state));
        }
        c.buffer_state = state == "warm" ? BufferState::warm : BufferState::cold;
    }
    build("costs", [&] {
        c.validate();
        return 0;
    });
    return c;
}

HardwareConfig parse_hardware_config(const json& doc) {
    HardwareConfig hw{parse_cpu(require(doc, "cpu", "config")), parse_disk(require(doc, "disk", "config")),
                      parse_system(require(doc, "system", "config")),
                      number_or(doc, "psu_efficiency", "config", 0.83)};
    if (!(hw.psu_efficiency > 0.0 && hw.psu_efficiency <= 1.0)) {
        throw ConfigError("key 'config.psu_efficiency' must lie in (0, 1]");
    }
    return hw;
}

HardwareConfig load_hardware_config(const std::filesystem::path& path) {
    return parse_hardware_config(read_json_file(path));
}

} // namespace qenergy
