#include <qenergy/error.hpp>
#include <qenergy/qed.hpp>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

namespace qenergy {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

const Table& env_table(const ExecutionEnv& env) {
    if (env.table == nullptr) {
        throw ModelError("execution environment has no table");
    }
    return *env.table;
}

const Table& table_for(const ExecutionEnv& env, const std::string& name) {
    for (const auto* t : env.catalog) {
        if (t != nullptr && t->name() == name && name != env_table(env).name()) {
            return *t;
        }
    }
    return env_table(env);
}

void append_sequential(std::span<const Query> queries, const ExecutionEnv& env, std::size_t window,
                       std::size_t first_batch_index, WorkloadRun& run) {
    Seconds window_start = run.total_elapsed;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (window > 0 && i % window == 0) {
            window_start = run.total_elapsed;
        }
        auto report = execute_selection(table_for(env, queries[i].table), queries[i], env.cpu, env.setting, env.disk, env.costs);
        QueryOutcome outcome;
        outcome.id = queries[i].id;
        outcome.batch_index = first_batch_index + (window > 0 ? i / window : 0);
        outcome.dispatch = run.total_elapsed;
        run.total_elapsed += report.elapsed;
        outcome.completion = run.total_elapsed;
        outcome.response = run.total_elapsed - window_start;
        outcome.rows = std::move(report.result_rows.at(queries[i].id));
        run.total_cpu_energy += report.cpu_energy;
        run.total_disk_energy += report.disk_energy;
        run.outcomes.push_back(std::move(outcome));
    }
}

} // namespace

QueryQueue::QueryQueue(std::size_t threshold) : threshold_(threshold) {
    if (threshold_ == 0) {
        throw ModelError("queue threshold must be positive");
    }
}

std::optional<std::vector<Query>> QueryQueue::accumulate(Query q) {
    pending_.push_back(std::move(q));
    if (pending_.size() < threshold_) {
        return std::nullopt;
    }
    return flush();
}

std::vector<Query> QueryQueue::flush() {
    std::vector<Query> batch;
    batch.swap(pending_);
    return batch;
}

MergedQuery merge_batch(std::span<const Query> batch) {
    if (batch.empty()) {
        throw ModelError("cannot merge an empty batch");
    }
    MergedQuery merged;
    merged.table = batch.front().table;
    merged.predicate.column = batch.front().predicate.column;
    std::unordered_set<std::int64_t> seen;
    for (const auto& q : batch) {
        if (q.table != merged.table || q.predicate.column != merged.predicate.column) {
            throw ModelError(fmt::format("batch not mergeable: query {} targets {}.{} but the batch targets {}.{}",
                                         static_cast<std::uint32_t>(q.id), q.table, q.predicate.column,
                                         merged.table, merged.predicate.column));
        }
        if (q.predicate.values.empty()) {
            throw ModelError(fmt::format("query {} has an empty predicate", static_cast<std::uint32_t>(q.id)));
        }
        for (const auto v : q.predicate.values) {
            if (seen.insert(v).second) {
                merged.predicate.values.push_back(v);
            }
        }
    }
    merged.members.assign(batch.begin(), batch.end());
    return merged;
}

std::string_view to_string(Scheme scheme) noexcept { return scheme == Scheme::sequential ? "sequential" : "qed"; }

Seconds WorkloadRun::average_response() const {
    if (outcomes.empty()) {
        return Seconds{};
    }
    Seconds sum{};
    for (const auto& o : outcomes) {
        sum += o.response;
    }
    return sum / static_cast<double>(outcomes.size());
}

std::map<QueryId, Seconds> WorkloadRun::per_query_response() const {
    std::map<QueryId, Seconds> out;
    for (const auto& o : outcomes) {
        out.emplace(o.id, o.response);
    }
    return out;
}

WorkloadRun run_sequential(std::span<const Query> queries, const ExecutionEnv& env, std::size_t window) {
    if (queries.empty()) {
        throw ModelError("run_sequential needs at least one query");
    }
    WorkloadRun run;
    run.scheme = Scheme::sequential;
    append_sequential(queries, env, window, 0, run);
    return run;
}

WorkloadRun run_qed(std::span<const Query> queries, std::size_t batch_size, const ExecutionEnv& env,
                    const QedOptions& options) {
    if (queries.empty()) {
        throw ModelError("run_qed needs at least one query");
    }
    if (batch_size == 0) {
        throw ModelError("batch size must be positive");
    }
    if (queries.size() % batch_size != 0 && options.partial == PartialBatchPolicy::reject) {
        throw ModelError(fmt::format("{} queries is not a multiple of the batch size {}", queries.size(), batch_size));
    }
    const Table& table = env_table(env);

    WorkloadRun run;
    run.scheme = Scheme::qed;
    std::size_t batch_index = 0;

    auto dispatch = [&](std::vector<Query> batch) {
        MergedQuery merged;
        try {
            merged = merge_batch(batch);
        } catch (const ModelError& e) {
            if (options.unmergeable == UnmergeablePolicy::error) {
                throw;
            }
            run.warnings.push_back(fmt::format("batch {} run sequentially: {}", batch_index, e.what()));
            append_sequential(batch, env, batch.size(), batch_index, run);
            ++batch_index;
            return;
        }
        const auto raw = execute_selection(table, merged, env.cpu, env.setting, env.disk, env.costs);
        auto split = split_results(raw, merged, table);
        const Seconds start = run.total_elapsed;
        run.total_elapsed += split.elapsed;
        run.total_cpu_energy += split.cpu_energy;
        run.total_disk_energy += split.disk_energy;
        for (const auto& member : merged.members) {
            QueryOutcome outcome;
            outcome.id = member.id;
            outcome.batch_index = batch_index;
            outcome.dispatch = start;
            outcome.completion = run.total_elapsed;
            outcome.response = split.elapsed;
            outcome.rows = split.result_rows.at(member.id);
            run.outcomes.push_back(std::move(outcome));
        }
        ++batch_index;
    };

    QueryQueue queue(batch_size);
    for (const auto& q : queries) {
        if (auto batch = queue.accumulate(q)) {
            dispatch(std::move(*batch));
        }
    }
    if (auto rest = queue.flush(); !rest.empty()) {
        dispatch(std::move(rest));
    }
    return run;
}

ComparisonReport compare_runs(const WorkloadRun& seq, const WorkloadRun& qed) {
    std::multiset<QueryId> seq_ids;
    std::multiset<QueryId> qed_ids;
    for (const auto& o : seq.outcomes) {
        seq_ids.insert(o.id);
    }
    for (const auto& o : qed.outcomes) {
        qed_ids.insert(o.id);
    }
    if (seq_ids.empty() || seq_ids != qed_ids) {
        throw ModelError("compared runs must cover the same query ids");
    }
    const double n = static_cast<double>(seq_ids.size());
    ComparisonReport report;
    report.energy_ratio = (qed.total_energy().value() / n) / (seq.total_energy().value() / n);
    report.avg_response_ratio = qed.average_response() / seq.average_response();
    report.edp_ratio = report.energy_ratio * report.avg_response_ratio;
    return report;
}

std::vector<Query> read_workload(std::istream& in) {
    std::vector<Query> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto c1 = text.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
        if (c2 == std::string_view::npos) {
            throw ConfigError(fmt::format("workload line {}: expected 'table,column,values'", line_no));
        }
        Query q;
        q.id = static_cast<QueryId>(out.size());
        q.table = std::string(trim(text.substr(0, c1)));
        q.predicate.column = std::string(trim(text.substr(c1 + 1, c2 - c1 - 1)));
        auto values = text.substr(c2 + 1);
        while (!values.empty()) {
            const auto semi = values.find(';');
            const auto token = trim(values.substr(0, semi));
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
            if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
                throw ConfigError(fmt::format("workload line {}: bad value '{}'", line_no, token));
            }
            q.predicate.values.push_back(v);
            values = semi == std::string_view::npos ? std::string_view{} : values.substr(semi + 1);
        }
        if (q.table.empty() || q.predicate.column.empty() || q.predicate.values.empty()) {
            throw ConfigError(fmt::format("workload line {}: table, column and values are required", line_no));
        }
        out.push_back(std::move(q));
    }
    return out;
}

void write_workload(std::span<const Query> queries, std::ostream& out) {
    for (const auto& q : queries) {
        out << q.table << ',' << q.predicate.column << ',' << fmt::format("{}", fmt::join(q.predicate.values, ";"))
            << '\n';
    }
}

void write_run_csv_header(std::ostream& out) { out << "query_id,scheme,response_s,batch_index\n"; }

void write_run_csv_rows(const WorkloadRun& run, std::string_view scheme_label, std::ostream& out) {
    for (const auto& o : run.outcomes) {
        out << fmt::format("{},{},{},{}\n", static_cast<std::uint32_t>(o.id), scheme_label, o.response.value(),
                           o.batch_index);
    }
}

void write_comparison_csv_header(std::ostream& out) { out << "batch_size,energy_ratio,response_ratio,edp_ratio\n"; }

void write_comparison_csv_row(std::size_t batch_size, const ComparisonReport& report, std::ostream& out) {
    out << fmt::format("{},{},{},{}\n", batch_size, report.energy_ratio, report.avg_response_ratio, report.edp_ratio);
}

} // namespace qenergy
