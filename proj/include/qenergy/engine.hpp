#pragma once

#include <qenergy/power_model.hpp>
#include <qenergy/units.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qenergy {

enum class QueryId : std::uint32_t {};
using RowId = std::uint32_t;
using RowIds = std::vector<RowId>;

struct Row {
    RowId row_id = 0;
    std::int64_t key_value = 0;

    friend bool operator==(const Row&, const Row&) = default;
};

/// @brief Single-column table scanned by the engine.
///
/// Row ids are dense from 0 and every key lies in `domain`.
class Table {
public:
    Table(std::string name, std::string column, std::vector<Row> rows, std::vector<std::int64_t> domain,
          std::uint64_t size_kb);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const std::string& column() const noexcept { return column_; }
    [[nodiscard]] std::span<const Row> rows() const noexcept { return rows_; }
    [[nodiscard]] std::span<const std::int64_t> domain() const noexcept { return domain_; }
    [[nodiscard]] std::uint64_t size_kb() const noexcept { return size_kb_; }
    [[nodiscard]] bool in_domain(std::int64_t value) const noexcept;

    friend bool operator==(const Table&, const Table&) = default;

private:
    std::string name_;
    std::string column_;
    std::vector<Row> rows_;
    std::vector<std::int64_t> domain_; // sorted, unique
    std::uint64_t size_kb_;
};

inline constexpr std::string_view kDefaultTableName = "lineitem";
inline constexpr std::string_view kDefaultColumnName = "l_quantity";

/// Uniform keys in {1..domain_size} from a seeded mt19937_64.
[[nodiscard]] Table generate_table(std::size_t row_count, std::int64_t domain_size, double kb_per_row,
                                   std::uint64_t seed, std::string name = std::string(kDefaultTableName),
                                   std::string column = std::string(kDefaultColumnName));

/// CSV with header `row_id,key_value`.
void write_table_csv(const Table& table, std::ostream& out);
/// Reads the format written by write_table_csv. The domain becomes the set of
/// keys present; size_kb is ceil(rows * kb_per_row).
[[nodiscard]] Table read_table_csv(std::istream& in, std::string name, std::string column, double kb_per_row);

/// Membership predicate `column IN (values...)`. Evaluation order follows
/// `values`, so a merged predicate tests members in batch order.
struct Predicate {
    std::string column;
    std::vector<std::int64_t> values;

    [[nodiscard]] bool matches(std::int64_t key) const noexcept;

    friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct Query {
    QueryId id{};
    std::string table;
    Predicate predicate;

    friend bool operator==(const Query&, const Query&) = default;
};

/// A batch evaluated as one scan with the disjunction of its members'
/// predicates. Build with merge_batch().
struct MergedQuery {
    std::vector<Query> members;
    std::string table;
    Predicate predicate;

    [[nodiscard]] std::vector<QueryId> member_ids() const;
};

enum class BufferState { warm, cold };

[[nodiscard]] std::string_view to_string(BufferState state) noexcept;

/// Engine cost knobs. The fixed per-query overheads model client round trip
/// and parse/optimize work that a merged batch pays once instead of per member.
struct CostParams {
    double cycles_scan_per_row = 0.0;
    double cycles_per_predicate_term_per_row = 0.0;
    double cycles_split_per_result_row = 0.0;
    Seconds fixed_overhead_time_per_query{};
    Joules fixed_overhead_energy_per_query{};
    BufferState buffer_state = BufferState::warm;

    void validate() const;
};

/// @brief Abstract work descriptor for queries the engine does not execute.
///
/// `cpu_fraction()` is the share of stock elapsed time spent on CPU work; it
/// is derived from the other fields against the stock CPU/disk, never set.
class WorkProfile {
public:
    [[nodiscard]] static WorkProfile make(double cpu_cycles, std::uint64_t disk_kb, AccessPattern disk_pattern,
                                          std::uint64_t disk_block_kb, const CpuModel& cpu, const DiskModel& disk);

    [[nodiscard]] double cpu_cycles() const noexcept { return cpu_cycles_; }
    [[nodiscard]] std::uint64_t disk_kb() const noexcept { return disk_kb_; }
    [[nodiscard]] AccessPattern disk_pattern() const noexcept { return disk_pattern_; }
    [[nodiscard]] std::uint64_t disk_block_kb() const noexcept { return disk_block_kb_; }
    [[nodiscard]] double cpu_fraction() const noexcept { return cpu_fraction_; }

    friend bool operator==(const WorkProfile&, const WorkProfile&) = default;

private:
    WorkProfile() = default;

    double cpu_cycles_ = 0.0;
    std::uint64_t disk_kb_ = 0;
    AccessPattern disk_pattern_ = AccessPattern::sequential;
    std::uint64_t disk_block_kb_ = 1;
    double cpu_fraction_ = 1.0;
};

/// Simulated outcome of one execution.
///
/// For a merged query the raw scan output sits in `merged_rows` until
/// split_results() routes it into `result_rows`.
struct ExecutionReport {
    Seconds elapsed{};
    Seconds cpu_busy{};
    Joules cpu_energy{};
    Joules disk_energy{};
    std::map<QueryId, RowIds> result_rows;
    RowIds merged_rows;

    [[nodiscard]] Joules total_energy() const noexcept { return cpu_energy + disk_energy; }

    friend bool operator==(const ExecutionReport&, const ExecutionReport&) = default;
};

/// Full scan of `table` for one query.
///
/// CPU cycles are `rows * cycles_scan_per_row + comparisons *
/// cycles_per_predicate_term_per_row`. The disjunction is evaluated left to
/// right and stops at the first matching term, so `comparisons` counts the
/// terms actually tested. Cold buffers add one sequential read of the table.
[[nodiscard]] ExecutionReport execute_selection(const Table& table, const Query& query, const CpuModel& cpu,
                                                const PvcSetting& setting, const DiskModel& disk,
                                                const CostParams& costs);

/// As above for a merged batch; additionally charges
/// `result_count * cycles_split_per_result_row` when the batch has two or
/// more members. Routing itself happens in split_results().
[[nodiscard]] ExecutionReport execute_selection(const Table& table, const MergedQuery& query, const CpuModel& cpu,
                                                const PvcSetting& setting, const DiskModel& disk,
                                                const CostParams& costs);

/// CPU time is cycles at the effective frequency; CPU energy is active power
/// over that time only. Disk time follows disk_read_sim().
[[nodiscard]] ExecutionReport execute_profile(const WorkProfile& profile, const CpuModel& cpu,
                                              const PvcSetting& setting, const DiskModel& disk);

/// Sums execute_profile() over a workload of profiles run back to back.
[[nodiscard]] ExecutionReport execute_profiles(std::span<const WorkProfile> profiles, const CpuModel& cpu,
                                               const PvcSetting& setting, const DiskModel& disk);

/// Routes every merged result row to each member whose predicate it
/// satisfies. Throws ModelError if a row matches no member.
[[nodiscard]] ExecutionReport split_results(const ExecutionReport& merged_report, const MergedQuery& query,
                                            const Table& table);

} // namespace qenergy
