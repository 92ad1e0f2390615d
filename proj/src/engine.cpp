#include <qenergy/engine.hpp>
#include <qenergy/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace qenergy {

namespace {

/// Position (0-based) of each predicate value in evaluation order. Dense
/// lookup when the key range is small, hashed otherwise.
class TermIndex {
public:
    explicit TermIndex(std::span<const std::int64_t> values) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        min_ = *lo;
        if (static_cast<std::uint64_t>(*hi - *lo) < (1U << 20)) {
            dense_.assign(static_cast<std::size_t>(*hi - *lo) + 1, kMissing);
            for (std::size_t i = 0; i < values.size(); ++i) {
                dense_[static_cast<std::size_t>(values[i] - min_)] = i;
            }
        } else {
            for (std::size_t i = 0; i < values.size(); ++i) {
                sparse_.emplace(values[i], i);
            }
        }
    }

    static constexpr std::size_t kMissing = static_cast<std::size_t>(-1);

    [[nodiscard]] std::size_t position(std::int64_t key) const noexcept {
        if (!dense_.empty()) {
            if (key < min_ || static_cast<std::uint64_t>(key - min_) >= dense_.size()) {
                return kMissing;
            }
            return dense_[static_cast<std::size_t>(key - min_)];
        }
        const auto it = sparse_.find(key);
        return it == sparse_.end() ? kMissing : it->second;
    }

private:
    std::int64_t min_ = 0;
    std::vector<std::size_t> dense_;
    std::unordered_map<std::int64_t, std::size_t> sparse_;
};

struct ScanResult {
    RowIds rows;
    double comparisons = 0.0;
};

void check_bound(const Table& table, const std::string& query_table, const Predicate& predicate) {
    if (query_table != table.name()) {
        throw ModelError(fmt::format("unknown table '{}' (have '{}')", query_table, table.name()));
    }
    if (predicate.column != table.column()) {
        throw ModelError(fmt::format("unknown column '{}' in table '{}'", predicate.column, table.name()));
    }
    if (predicate.values.empty()) {
        throw ModelError("empty predicate");
    }
    for (const auto v : predicate.values) {
        if (!table.in_domain(v)) {
            throw ModelError(fmt::format("predicate value {} is outside the domain of '{}'", v, table.name()));
        }
    }
}

ScanResult scan(const Table& table, const Predicate& predicate) {
    const TermIndex index(predicate.values);
    const std::size_t terms = predicate.values.size();
    ScanResult out;
    std::uint64_t comparisons = 0;
    for (const auto& row : table.rows()) {
        const auto pos = index.position(row.key_value);
        if (pos == TermIndex::kMissing) {
            comparisons += terms;
        } else {
            comparisons += pos + 1;
            out.rows.push_back(row.row_id);
        }
    }
    out.comparisons = static_cast<double>(comparisons);
    return out;
}

ExecutionReport charge(const Table& table, double cycles, const CpuModel& cpu, const PvcSetting& setting,
                       const DiskModel& disk, const CostParams& costs) {
    const PState pstate = operating_pstate(cpu, setting);
    const Hertz freq = effective_frequency(cpu, pstate, setting);

    Seconds disk_time{};
    ExecutionReport report;
    if (costs.buffer_state == BufferState::cold && table.size_kb() > 0) {
        const auto dr = disk_read_sim(disk, AccessPattern::sequential, table.size_kb(), table.size_kb());
        disk_time = dr.elapsed;
        report.disk_energy = dr.energy;
    }
    report.cpu_busy = time_for_cycles(cycles, freq);
    const Seconds idle = costs.fixed_overhead_time_per_query + disk_time;
    report.elapsed = costs.fixed_overhead_time_per_query + report.cpu_busy + disk_time;
    report.cpu_energy = cpu_active_power(cpu, pstate, setting) * report.cpu_busy + cpu.idle_power() * idle +
                        costs.fixed_overhead_energy_per_query;
    return report;
}

} // namespace

Table::Table(std::string name, std::string column, std::vector<Row> rows, std::vector<std::int64_t> domain,
             std::uint64_t size_kb)
    : name_(std::move(name))
    , column_(std::move(column))
    , rows_(std::move(rows))
    , domain_(std::move(domain))
    , size_kb_(size_kb) {
    std::sort(domain_.begin(), domain_.end());
    domain_.erase(std::unique(domain_.begin(), domain_.end()), domain_.end());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].row_id != i) {
            throw ModelError(fmt::format("row ids must be dense from 0; row {} has id {}", i, rows_[i].row_id));
        }
        if (!in_domain(rows_[i].key_value)) {
            throw ModelError(fmt::format("row {} key {} is outside the table domain", i, rows_[i].key_value));
        }
    }
}

bool Table::in_domain(std::int64_t value) const noexcept {
    return std::binary_search(domain_.begin(), domain_.end(), value);
}

Table generate_table(std::size_t row_count, std::int64_t domain_size, double kb_per_row, std::uint64_t seed,
                     std::string name, std::string column) {
    if (row_count == 0 || domain_size <= 0) {
        throw ModelError("generate_table needs row_count > 0 and domain_size > 0");
    }
    if (!(kb_per_row >= 0.0)) {
        throw ModelError("kb_per_row must be non-negative");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> dist(1, domain_size);
    std::vector<Row> rows(row_count);
    for (std::size_t i = 0; i < row_count; ++i) {
        rows[i] = Row{static_cast<RowId>(i), dist(rng)};
    }
    std::vector<std::int64_t> domain(static_cast<std::size_t>(domain_size));
    for (std::int64_t v = 1; v <= domain_size; ++v) {
        domain[static_cast<std::size_t>(v - 1)] = v;
    }
    const auto size_kb = static_cast<std::uint64_t>(std::ceil(static_cast<double>(row_count) * kb_per_row));
    return Table(std::move(name), std::move(column), std::move(rows), std::move(domain), size_kb);
}

void write_table_csv(const Table& table, std::ostream& out) {
    out << "row_id,key_value\n";
    for (const auto& row : table.rows()) {
        out << row.row_id << ',' << row.key_value << '\n';
    }
}

Table read_table_csv(std::istream& in, std::string name, std::string column, double kb_per_row) {
    std::string line;
    if (!std::getline(in, line) || line != "row_id,key_value") {
        throw ConfigError("table CSV must start with the header 'row_id,key_value'");
    }
    std::vector<Row> rows;
    std::vector<std::int64_t> domain;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        Row row;
        char comma = 0;
        if (!(fields >> row.row_id >> comma >> row.key_value) || comma != ',') {
            throw ConfigError(fmt::format("malformed table CSV line {}: '{}'", line_no, line));
        }
        rows.push_back(row);
        domain.push_back(row.key_value);
    }
    const auto size_kb = static_cast<std::uint64_t>(std::ceil(static_cast<double>(rows.size()) * kb_per_row));
    return Table(std::move(name), std::move(column), std::move(rows), std::move(domain), size_kb);
}

bool Predicate::matches(std::int64_t key) const noexcept {
    return std::find(values.begin(), values.end(), key) != values.end();
}

std::vector<QueryId> MergedQuery::member_ids() const {
    std::vector<QueryId> ids;
    ids.reserve(members.size());
    for (const auto& m : members) {
        ids.push_back(m.id);
    }
    return ids;
}

std::string_view to_string(BufferState state) noexcept { return state == BufferState::warm ? "warm" : "cold"; }

void CostParams::validate() const {
    if (!(cycles_scan_per_row >= 0.0 && cycles_per_predicate_term_per_row >= 0.0 &&
          cycles_split_per_result_row >= 0.0 && fixed_overhead_time_per_query.value() >= 0.0 &&
          fixed_overhead_energy_per_query.value() >= 0.0)) {
        throw ModelError("cost parameters must be non-negative");
    }
}

WorkProfile WorkProfile::make(double cpu_cycles, std::uint64_t disk_kb, AccessPattern disk_pattern,
                              std::uint64_t disk_block_kb, const CpuModel& cpu, const DiskModel& disk) {
    if (!(cpu_cycles >= 0.0)) {
        throw ModelError("cpu_cycles must be non-negative");
    }
    if (disk_block_kb == 0) {
        throw ModelError("disk_block_kb must be positive");
    }
    if (cpu_cycles == 0.0 && disk_kb == 0) {
        throw ModelError("work profile has no work");
    }
    WorkProfile p;
    p.cpu_cycles_ = cpu_cycles;
    p.disk_kb_ = disk_kb;
    p.disk_pattern_ = disk_pattern;
    p.disk_block_kb_ = disk_block_kb;

    const auto stock = PvcSetting::stock();
    const Seconds cpu_time = time_for_cycles(cpu_cycles, effective_frequency(cpu, operating_pstate(cpu, stock), stock));
    Seconds disk_time{};
    if (disk_kb > 0) {
        disk_time = disk_read_sim(disk, disk_pattern, disk_block_kb, disk_kb).elapsed;
    }
    p.cpu_fraction_ = cpu_time / (cpu_time + disk_time);
    return p;
}

ExecutionReport execute_selection(const Table& table, const Query& query, const CpuModel& cpu,
                                  const PvcSetting& setting, const DiskModel& disk, const CostParams& costs) {
    check_bound(table, query.table, query.predicate);
    costs.validate();
    auto result = scan(table, query.predicate);
    const double cycles = static_cast<double>(table.rows().size()) * costs.cycles_scan_per_row +
                          result.comparisons * costs.cycles_per_predicate_term_per_row;
    auto report = charge(table, cycles, cpu, setting, disk, costs);
    report.result_rows.emplace(query.id, std::move(result.rows));
    return report;
}

ExecutionReport execute_selection(const Table& table, const MergedQuery& query, const CpuModel& cpu,
                                  const PvcSetting& setting, const DiskModel& disk, const CostParams& costs) {
    if (query.members.empty()) {
        throw ModelError("merged query has no members");
    }
    check_bound(table, query.table, query.predicate);
    costs.validate();
    auto result = scan(table, query.predicate);
    double cycles = static_cast<double>(table.rows().size()) * costs.cycles_scan_per_row +
                    result.comparisons * costs.cycles_per_predicate_term_per_row;
    if (query.members.size() > 1) {
        cycles += static_cast<double>(result.rows.size()) * costs.cycles_split_per_result_row;
    }
    auto report = charge(table, cycles, cpu, setting, disk, costs);
    report.merged_rows = std::move(result.rows);
    return report;
}

ExecutionReport execute_profile(const WorkProfile& profile, const CpuModel& cpu, const PvcSetting& setting,
                                const DiskModel& disk) {
    const PState pstate = operating_pstate(cpu, setting);
    ExecutionReport report;
    report.cpu_busy = time_for_cycles(profile.cpu_cycles(), effective_frequency(cpu, pstate, setting));
    report.cpu_energy = cpu_active_power(cpu, pstate, setting) * report.cpu_busy;
    report.elapsed = report.cpu_busy;
    if (profile.disk_kb() > 0) {
        const auto dr = disk_read_sim(disk, profile.disk_pattern(), profile.disk_block_kb(), profile.disk_kb());
        report.elapsed += dr.elapsed;
        report.disk_energy = dr.energy;
    }
    return report;
}

ExecutionReport execute_profiles(std::span<const WorkProfile> profiles, const CpuModel& cpu,
                                 const PvcSetting& setting, const DiskModel& disk) {
    ExecutionReport total;
    for (const auto& p : profiles) {
        const auto r = execute_profile(p, cpu, setting, disk);
        total.elapsed += r.elapsed;
        total.cpu_busy += r.cpu_busy;
        total.cpu_energy += r.cpu_energy;
        total.disk_energy += r.disk_energy;
    }
    return total;
}

ExecutionReport split_results(const ExecutionReport& merged_report, const MergedQuery& query, const Table& table) {
    std::unordered_map<std::int64_t, std::vector<std::size_t>> routes;
    for (std::size_t m = 0; m < query.members.size(); ++m) {
        for (const auto v : query.members[m].predicate.values) {
            auto& targets = routes[v];
            if (targets.empty() || targets.back() != m) {
                targets.push_back(m);
            }
        }
    }
    ExecutionReport out = merged_report;
    out.merged_rows.clear();
    out.result_rows.clear();
    std::vector<RowIds> per_member(query.members.size());
    const auto rows = table.rows();
    for (const auto row_id : merged_report.merged_rows) {
        if (row_id >= rows.size()) {
            throw ModelError(fmt::format("merged result row {} does not exist in '{}'", row_id, table.name()));
        }
        const auto it = routes.find(rows[row_id].key_value);
        if (it == routes.end()) {
            throw ModelError(fmt::format("merged result row {} (key {}) satisfies no member predicate", row_id,
                                         rows[row_id].key_value));
        }
        for (const auto m : it->second) {
            per_member[m].push_back(row_id);
        }
    }
    for (std::size_t m = 0; m < query.members.size(); ++m) {
        out.result_rows[query.members[m].id] = std::move(per_member[m]);
    }
    return out;
}

} // namespace qenergy
