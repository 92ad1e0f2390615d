#pragma once

#include <qenergy/engine.hpp>

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qenergy {

/// FIFO admission queue that releases a batch once `threshold` queries wait.
class QueryQueue {
public:
    explicit QueryQueue(std::size_t threshold);

    /// Appends `q`; returns the drained batch when the threshold is reached.
    [[nodiscard]] std::optional<std::vector<Query>> accumulate(Query q);

    /// Drains whatever is pending (possibly nothing).
    [[nodiscard]] std::vector<Query> flush();

    [[nodiscard]] std::size_t threshold() const noexcept { return threshold_; }
    [[nodiscard]] std::span<const Query> pending() const noexcept { return pending_; }

private:
    std::size_t threshold_;
    std::vector<Query> pending_;
};

/// Disjunctive merge. All members must target the same table and column;
/// the merged value list keeps member order and drops repeats.
[[nodiscard]] MergedQuery merge_batch(std::span<const Query> batch);

/// Everything a query execution needs besides the query itself. `table` is
/// the scan target; `catalog` lists further tables that queries falling back
/// to sequential execution may name.
struct ExecutionEnv {
    const Table* table = nullptr;
    CpuModel cpu;
    PvcSetting setting;
    DiskModel disk;
    CostParams costs;
    std::vector<const Table*> catalog;
};

enum class Scheme { sequential, qed };

[[nodiscard]] std::string_view to_string(Scheme scheme) noexcept;

struct QueryOutcome {
    QueryId id{};
    std::size_t batch_index = 0;
    Seconds dispatch{};  ///< absolute simulated clock when the query (or its batch) was sent
    Seconds completion{}; ///< absolute simulated clock when its result was available
    Seconds response{};  ///< measured from the dispatch of the query's batch/window
    RowIds rows;
};

/// Per-query timing and workload totals for one scheme.
struct WorkloadRun {
    Scheme scheme = Scheme::sequential;
    std::vector<QueryOutcome> outcomes; // FIFO order
    Joules total_cpu_energy{};
    Joules total_disk_energy{};
    Seconds total_elapsed{};
    std::vector<std::string> warnings;

    [[nodiscard]] Seconds average_response() const;
    [[nodiscard]] std::map<QueryId, Seconds> per_query_response() const;
    [[nodiscard]] Joules total_energy() const noexcept { return total_cpu_energy + total_disk_energy; }
};

/// Runs queries one at a time with zero think time. Response times are
/// measured from the start of each window of `window` queries (0 means one
/// window covering the whole list).
[[nodiscard]] WorkloadRun run_sequential(std::span<const Query> queries, const ExecutionEnv& env,
                                         std::size_t window = 0);

enum class PartialBatchPolicy { reject, flush };
enum class UnmergeablePolicy { error, fall_back_sequential };

struct QedOptions {
    PartialBatchPolicy partial = PartialBatchPolicy::reject;
    UnmergeablePolicy unmergeable = UnmergeablePolicy::error;
};

/// Queues queries, executes each full batch as one merged scan and splits
/// the result. Every member's response is its batch's elapsed time; time
/// spent waiting for the batch to fill is not counted.
[[nodiscard]] WorkloadRun run_qed(std::span<const Query> queries, std::size_t batch_size, const ExecutionEnv& env,
                                  const QedOptions& options = {});

/// Per-query energy and average-response ratios of `qed` over `seq`.
struct ComparisonReport {
    double energy_ratio = 1.0;
    double avg_response_ratio = 1.0;
    double edp_ratio = 1.0;
};

[[nodiscard]] ComparisonReport compare_runs(const WorkloadRun& seq, const WorkloadRun& qed);

/// Workload file: one query per line, `table,column,v1;v2;...`. Blank lines
/// and lines starting with '#' are skipped; ids follow line order from 0.
[[nodiscard]] std::vector<Query> read_workload(std::istream& in);
void write_workload(std::span<const Query> queries, std::ostream& out);

/// `query_id,scheme,response_s,batch_index`, one line per outcome.
void write_run_csv_header(std::ostream& out);
void write_run_csv_rows(const WorkloadRun& run, std::string_view scheme_label, std::ostream& out);

/// `batch_size,energy_ratio,response_ratio,edp_ratio`.
void write_comparison_csv_header(std::ostream& out);
void write_comparison_csv_row(std::size_t batch_size, const ComparisonReport& report, std::ostream& out);

} // namespace qenergy
