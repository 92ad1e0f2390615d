#pragma once

#include <qenergy/config.hpp>
#include <qenergy/engine.hpp>
#include <qenergy/power_model.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qenergy {

struct SelectionWorkloadSpec {
    std::size_t query_count = 50;
    std::int64_t domain_size = 50;
    std::size_t terms = 1;
    bool non_overlapping = true;
    std::uint64_t seed = 0;
    std::string table = std::string(kDefaultTableName);
    std::string column = std::string(kDefaultColumnName);
};

/// Queries with ids 0..n-1. Non-overlapping workloads deal values from one
/// seeded permutation of 1..domain_size; otherwise each query draws its
/// terms independently (distinct within the query).
[[nodiscard]] std::vector<Query> gen_selection_workload(const SelectionWorkloadSpec& spec);

/// `n` copies of `base`.
[[nodiscard]] std::vector<WorkProfile> gen_pvc_workload(std::size_t n, const WorkProfile& base);

/// An observed ratio for one sweep setting.
struct CalibrationTarget {
    std::string setting; // label, e.g. "u5-med"
    double edp_ratio = 1.0;
    std::optional<double> time_ratio;
    std::optional<double> energy_ratio;
};

struct StockExpectation {
    Seconds elapsed{};
    Joules cpu_energy{};
    Joules disk_energy{};
};

/// @brief Abstract-profile workload run under the PVC sweep.
///
/// `voltage_factors` holds one calibrated factor per setting label; settings
/// without an entry fall back to the CPU's downgrade presets.
struct PvcFixture {
    std::string name;
    std::string provenance;
    CpuModel cpu;
    DiskModel disk;
    WorkProfile profile;
    std::size_t queries = 10;
    std::map<std::string, double> voltage_factors;
    std::vector<CalibrationTarget> targets;
    std::optional<StockExpectation> expected_stock;

    [[nodiscard]] PvcSetting setting(std::string_view label) const;
    /// Stock plus {5,10,15}% x {small, medium}, with calibrated factors.
    [[nodiscard]] std::vector<PvcSetting> sweep_settings() const;
    [[nodiscard]] std::vector<WorkProfile> workload() const { return gen_pvc_workload(queries, profile); }
};

struct QedTarget {
    std::size_t batch_size = 0;
    std::optional<double> energy_ratio;
    std::optional<double> response_ratio;
    std::optional<double> edp_ratio;
};

/// Selection workload run under QED at stock settings.
struct QedFixture {
    std::string name;
    std::string provenance;
    CpuModel cpu;
    DiskModel disk;
    CostParams costs;
    std::size_t rows = 0;
    std::int64_t domain_size = 50;
    double kb_per_row = 0.1;
    std::uint64_t table_seed = 0;
    SelectionWorkloadSpec workload;
    std::vector<std::size_t> batch_sizes;
    std::vector<QedTarget> targets;

    [[nodiscard]] Table make_table() const;
    [[nodiscard]] std::vector<Query> make_workload() const { return gen_selection_workload(workload); }
};

inline constexpr std::array<std::string_view, 4> kRequiredFixtures = {"q5_commercial_warm", "q5_commercial_cold",
                                                                      "q5_mysql_memory", "qed_lineitem"};

struct FixtureSet {
    HardwareConfig hardware;
    std::map<std::string, PvcFixture, std::less<>> pvc;
    std::map<std::string, QedFixture, std::less<>> qed;

    [[nodiscard]] const PvcFixture& pvc_fixture(std::string_view name) const;
    [[nodiscard]] const QedFixture& qed_fixture(std::string_view name) const;
    [[nodiscard]] std::vector<std::string> names() const;
};

/// Fixture file: `hardware` (path relative to the file, or an inline
/// object) and `fixtures`, a map from name to either a profile fixture
/// (`kind: "profile"`) or a selection fixture (`kind: "selection"`). Each
/// fixture may override `cpu`/`disk` keys of the shared hardware. A
/// non-empty `hardware` path replaces the hardware the file names.
[[nodiscard]] FixtureSet load_fixtures(const std::filesystem::path& path, const std::filesystem::path& hardware = {});
[[nodiscard]] FixtureSet parse_fixtures(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                        const nlohmann::json* hardware = nullptr);

} // namespace qenergy
