// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <qenergy/config.hpp>
#include <qenergy/engine.hpp>
#include <qenergy/pvc.hpp>
#include <qenergy/qed.hpp>
#include <qenergy/workload.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace qenergy;

namespace {

const std::filesystem::path kData = QENERGY_DATA_DIR;

struct Verdict {
    bool pass = true;
    std::string detail;
};

class Timer {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string pct(double ratio) { return fmt::format("{:+.1f}%", (ratio - 1.0) * 100.0); }

bool within_pp(double ratio, double expected_delta_pct, double tol_pp) {
    return std::abs((ratio - 1.0) * 100.0 - expected_delta_pct) <= tol_pp;
}

const OperatingPoint& point(const SweepResult& s, const std::string& label) {
    for (const auto& p : s.points) {
        if (p.setting.label() == label) {
            return p;
        }
    }
    throw std::runtime_error("missing sweep point " + label);
}

SweepResult fixture_sweep(const PvcFixture& fx) {
    const auto work = fx.workload();
    return run_sweep(work, fx.sweep_settings(), fx.cpu, fx.disk);
}

// 1. Pure-CPU profiles obey v^2 / (1 - u) exactly.
Verdict analytic_edp_oracle() {
    Timer timer;
    const CpuModel cpu(megahertz(333.0), {{9, Volts{1.25}}, {8, Volts{1.2}}}, 1.0, Watts{0.0});
    const DiskModel disk(Seconds{0.0}, 1.0, Watts{0.0}, Watts{0.0});
    const auto work = gen_pvc_workload(10, WorkProfile::make(2.5e9, 0, AccessPattern::sequential, 1, cpu, disk));
    double worst = 0.0;
    for (const double u : {0.0, 0.05, 0.10, 0.15}) {
        for (const double v : {1.0, 0.9, 0.71}) {
            PvcSetting s;
            s.underclock = u;
            if (v != 1.0) {
                s.downgrade = {DowngradeLevel::medium, v};
            }
            const std::vector<PvcSetting> settings{PvcSetting::stock(), s};
            const auto sweep = run_sweep(work, settings, cpu, disk);
            const double expected = v * v / (1.0 - u);
            worst = std::max(worst, std::abs(sweep.points[1].edp_ratio - expected) / expected);
        }
    }
    const double t = timer.seconds();
    return {worst <= 1e-9 && t < 1.0, fmt::format("max relative error {:.2e} over 12 points, {:.3f} s", worst, t)};
}

// 2. Observed EDP tracks the theoretical V^2/F ratio on the CPU-bound fixture.
Verdict edp_shape_vs_theory(const FixtureSet& set) {
    const auto& fx = set.pvc_fixture("q5_mysql_memory");
    const auto sweep = fixture_sweep(fx);
    std::vector<double> observed;
    std::vector<double> theory;
    double worst = 0.0;
    for (const auto& p : sweep.points) {
        if (p.setting.is_stock()) {
            continue;
        }
        const double v = p.setting.downgrade.factor;
        const double th = v * v / (1.0 - p.setting.underclock);
        observed.push_back(p.edp_ratio);
        theory.push_back(th);
        worst = std::max(worst, std::abs(p.edp_ratio - th) / th);
    }
    auto order = [](const std::vector<double>& xs) {
        std::vector<std::size_t> idx(xs.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
        return idx;
    };
    const bool same_order = order(observed) == order(theory);
    return {observed.size() == 6 && worst <= 0.02 && same_order,
            fmt::format("{} points, max relative gap {:.2e}, ordering {}", observed.size(), worst,
                        same_order ? "identical" : "differs")};
}

// 3. Commercial DBMS fixture: setting A and both downgrade ladders.
Verdict commercial_pvc_fixture(const FixtureSet& set) {
    Timer timer;
    const auto sweep = fixture_sweep(set.pvc_fixture("q5_commercial_warm"));
    const auto& a = point(sweep, "u5-med");
    bool ok = std::abs(a.energy_ratio - 0.51) <= 0.01 && std::abs(a.time_ratio - 1.03) <= 0.005;
    std::string detail = fmt::format("u5-med energy {:.4f} time {:.4f};", a.energy_ratio, a.time_ratio);
    const struct {
        const char* label;
        double delta;
    } expected[] = {{"u5-med", -47}, {"u10-med", -38}, {"u15-med", -23},
                    {"u5-small", -30}, {"u10-small", -22}, {"u15-small", -15}};
    for (const auto& e : expected) {
        const double r = point(sweep, e.label).edp_ratio;
        ok = ok && within_pp(r, e.delta, 1.0);
        detail += fmt::format(" {} {}", e.label, pct(r));
    }
    const double t = timer.seconds();
    return {ok && t < 5.0, fmt::format("{}; {:.3f} s", detail, t)};
}

// 4. MySQL fixture EDP deltas.
Verdict mysql_pvc_fixture(const FixtureSet& set) {
    const auto sweep = fixture_sweep(set.pvc_fixture("q5_mysql_memory"));
    const struct {
        const char* label;
        double delta;
    } expected[] = {{"u5-small", -7}, {"u10-small", -0.4}, {"u15-small", 9},
                    {"u5-med", -16}, {"u10-med", -8}, {"u15-med", 0}};
    bool ok = true;
    std::string detail;
    for (const auto& e : expected) {
        const double r = point(sweep, e.label).edp_ratio;
        ok = ok && within_pp(r, e.delta, 1.0);
        detail += fmt::format("{}{} {}", detail.empty() ? "" : " ", e.label, pct(r));
    }
    return {ok, detail};
}

// 5. Merged-then-split results equal independent per-query scans.
Verdict qed_correctness() {
    Timer timer;
    std::mt19937_64 rng(20240601);
    const auto cpu = CpuModel(megahertz(333.0), {{9, Volts{1.25}}}, 1.0, Watts{1.0});
    const DiskModel disk(Seconds{0.001}, 60'000.0, Watts{10.0}, Watts{0.0});
    CostParams costs;
    costs.cycles_scan_per_row = 50.0;
    costs.cycles_per_predicate_term_per_row = 10.0;
    costs.cycles_split_per_result_row = 100.0;
    std::size_t mismatches = 0;
    std::size_t queries_checked = 0;
    for (int instance = 0; instance < 1000; ++instance) {
        const auto table = generate_table(10'000, 50, 0.1, rng());
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
        std::uniform_int_distribution<std::int64_t> value(1, 50);
        std::uniform_int_distribution<int> width(1, 3);
        std::vector<Query> batch;
        for (std::size_t i = 0; i < k; ++i) {
            Query q{static_cast<QueryId>(i), table.name(), Predicate{table.column(), {}}};
            for (int w = width(rng); w > 0; --w) {
                const auto v = value(rng);
                if (std::find(q.predicate.values.begin(), q.predicate.values.end(), v) == q.predicate.values.end()) {
                    q.predicate.values.push_back(v);
                }
            }
            batch.push_back(std::move(q));
        }
        const ExecutionEnv env{&table, cpu, PvcSetting::stock(), disk, costs, {}};
        const auto run = run_qed(batch, k, env);
        for (std::size_t i = 0; i < k; ++i) {
            const std::set<std::int64_t> wanted(batch[i].predicate.values.begin(), batch[i].predicate.values.end());
            RowIds oracle;
            for (const auto& row : table.rows()) {
                if (wanted.count(row.key_value) > 0) {
                    oracle.push_back(row.row_id);
                }
            }
            ++queries_checked;
            if (run.outcomes[i].id != batch[i].id || run.outcomes[i].rows != oracle) {
                ++mismatches;
            }
        }
    }
    const double t = timer.seconds();
    return {mismatches == 0 && t < 30.0,
            fmt::format("1000 instances, {} queries, {} mismatches, {:.2f} s", queries_checked, mismatches, t)};
}

// 6. QED fixture against published batch-size results.
Verdict qed_batch_fixture(const FixtureSet& set) {
    const auto& fx = set.qed_fixture("qed_lineitem");
    const auto table = fx.make_table();
    const auto queries = fx.make_workload();
    const ExecutionEnv env{&table, fx.cpu, PvcSetting::stock(), fx.disk, fx.costs, {}};
    struct Expect {
        std::size_t k;
        double energy;
        double response;
        std::optional<double> edp;
    };
    const Expect expected[] = {{35, -46, 52, -18}, {40, -51, 50, -26}, {50, -54, 43, std::nullopt}};
    std::map<std::size_t, ComparisonReport> reports;
    for (const std::size_t k : {35U, 40U, 45U, 50U}) {
        const std::span<const Query> subset(queries.data(), queries.size() / k * k);
        reports[k] = compare_runs(run_sequential(subset, env, k), run_qed(subset, k, env));
    }
    bool ok = true;
    std::string detail;
    for (const auto& e : expected) {
        const auto& r = reports.at(e.k);
        ok = ok && within_pp(r.energy_ratio, e.energy, 3.0) && within_pp(r.avg_response_ratio, e.response, 3.0);
        if (e.edp) {
            ok = ok && within_pp(r.edp_ratio, *e.edp, 3.0);
        }
        detail += fmt::format("K={} energy {} response {} EDP {}; ", e.k, pct(r.energy_ratio),
                              pct(r.avg_response_ratio), pct(r.edp_ratio));
    }
    std::vector<double> energy;
    for (const auto& [k, r] : reports) {
        energy.push_back(r.energy_ratio);
    }
    bool shape = true;
    for (std::size_t i = 0; i + 1 < energy.size(); ++i) {
        shape = shape && energy[i + 1] < energy[i];
    }
    for (std::size_t i = 0; i + 2 < energy.size(); ++i) {
        shape = shape && (energy[i] - energy[i + 1]) > (energy[i + 1] - energy[i + 2]);
    }
    detail += fmt::format("decrements {:.4f} {:.4f} {:.4f}", energy[0] - energy[1], energy[1] - energy[2],
                          energy[2] - energy[3]);
    return {ok && shape, detail};
}

// 7. Disk mean-value model.
Verdict disk_model() {
    const auto hw = load_hardware_config(kData / "table1.cfg");
    const double rate = hw.disk.transfer_rate_kb_s();
    const Seconds seek{14.67 * 4.0 / rate};
    const DiskModel disk(seek, rate, hw.disk.active_power(), hw.disk.idle_power());
    const std::uint64_t total = 1'600'000;
    double lo = INFINITY;
    double hi = 0.0;
    for (const std::uint64_t b : {4U, 8U, 16U, 32U}) {
        const double e = disk_read_sim(disk, AccessPattern::sequential, b, total).energy_per_kb;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    const double spread = (hi - lo) / lo;
    const double base = disk_read_sim(disk, AccessPattern::random, 4, total).throughput_kb_s;
    const double paper[] = {1.88, 3.5, 6.0};
    const std::uint64_t blocks[] = {8, 16, 32};
    bool ok = spread <= 1e-9 && std::abs(hw.disk.seek_time().value() - seek.value()) <= 1e-12;
    std::string detail = fmt::format("sequential spread {:.1e}; random ratios", spread);
    for (int i = 0; i < 3; ++i) {
        const double r = disk_read_sim(disk, AccessPattern::random, blocks[i], total).throughput_kb_s / base;
        ok = ok && std::abs(r - paper[i]) <= 0.10 * paper[i];
        detail += fmt::format(" {:.3f}", r);
    }
    return {ok, detail};
}

// 8. Warm and cold buffer fixtures.
Verdict warm_cold(const FixtureSet& set) {
    auto stock = [&](const char* name) {
        const auto& fx = set.pvc_fixture(name);
        const auto work = fx.workload();
        return execute_profiles(work, fx.cpu, PvcSetting::stock(), fx.disk);
    };
    const auto warm = stock("q5_commercial_warm");
    const auto cold = stock("q5_commercial_cold");
    const double warm_ratio = warm.disk_energy / warm.cpu_energy;
    const double cold_ratio = cold.disk_energy / cold.cpu_energy;
    const double slow = cold.elapsed / warm.elapsed;
    const bool ok = std::abs(warm_ratio / (214.7 / 1228.7) - 1.0) <= 0.01 &&
                    std::abs(cold_ratio / (1135.4 / 2146.0) - 1.0) <= 0.01 &&
                    std::abs(slow / (156.0 / 48.5) - 1.0) <= 0.02;
    return {ok, fmt::format("warm disk/cpu {:.4f}, cold disk/cpu {:.4f}, cold/warm time {:.4f}", warm_ratio,
                            cold_ratio, slow)};
}

// 9. Component ladder.
Verdict component_ladder() {
    const auto hw = load_hardware_config(kData / "table1.cfg");
    const double measured[] = {9.2, 20.1, 49.7, 54.0, 55.7, 69.3};
    std::set<Component> enabled;
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < kComponentLadder.size(); ++i) {
        enabled.insert(kComponentLadder[i]);
        const double w = system_baseline_power(hw.system, enabled).value();
        ok = ok && w == measured[i];
        detail += fmt::format("{}{}", i == 0 ? "" : " ", w);
    }
    return {ok, detail + " W"};
}

// 10. Trimmed mean of five.
Verdict protocol_ops() {
    const bool example = trimmed_mean_of_five(std::vector<double>{1, 2, 3, 4, 5}) == 3.0;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(-1000.0, 1000.0);
    std::size_t violations = 0;
    for (int i = 0; i < 10'000; ++i) {
        std::vector<double> xs(5);
        for (auto& x : xs) {
            x = d(rng);
        }
        const double m = trimmed_mean_of_five(xs);
        std::shuffle(xs.begin(), xs.end(), rng);
        if (trimmed_mean_of_five(xs) != m) {
            ++violations;
        }
    }
    return {example && violations == 0,
            fmt::format("[1..5] -> 3 {}, {} permutation violations in 10000", example ? "ok" : "wrong", violations)};
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, fmt::format("threw: {}", e.what())};
        }
        fmt::print("criterion {:>2} {}: {} ({})\n", id, v.pass ? "PASS" : "FAIL", name, v.detail);
        failures += v.pass ? 0 : 1;
    };

    std::optional<FixtureSet> set;
    try {
        set = load_fixtures(kData / "fixtures.cfg");
    } catch (const std::exception& e) {
        fmt::print("fixtures failed to load: {}\n", e.what());
    }
    auto with_set = [&](Verdict (*fn)(const FixtureSet&)) {
        return [&set, fn] {
            if (!set) {
                throw std::runtime_error("fixtures unavailable");
            }
            return fn(*set);
        };
    };

    report(1, "analytic EDP oracle", analytic_edp_oracle);
    report(2, "observed vs theoretical EDP shape", with_set(edp_shape_vs_theory));
    report(3, "commercial DBMS PVC fixture", with_set(commercial_pvc_fixture));
    report(4, "MySQL PVC fixture", with_set(mysql_pvc_fixture));
    report(5, "QED merge/split correctness", qed_correctness);
    report(6, "QED batch-size fixture", with_set(qed_batch_fixture));
    report(7, "disk model", disk_model);
    report(8, "warm/cold fixtures", with_set(warm_cold));
    report(9, "component power ladder", component_ladder);
    report(10, "trimmed-mean protocol", protocol_ops);

    fmt::print("{} of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
