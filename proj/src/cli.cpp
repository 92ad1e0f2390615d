#include <qenergy/cli.hpp>
#include <qenergy/config.hpp>
#include <qenergy/error.hpp>
#include <qenergy/pvc.hpp>
#include <qenergy/qed.hpp>
#include <qenergy/workload.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#ifndef QENERGY_DATA_DIR
#define QENERGY_DATA_DIR "data"
#endif

namespace qenergy {

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_output(const RunConfig& cfg, std::string_view file) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create '{}': {}", cfg.out_dir.string(), ec.message()));
    }
    const auto path = cfg.out_dir / file;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(fmt::format("cannot write '{}'", path.string()));
    }
    return out;
}

void close_output(std::ofstream& out, const RunConfig& cfg, std::string_view file) {
    out.close();
    if (!out) {
        throw IoError(fmt::format("failed writing '{}'", (cfg.out_dir / file).string()));
    }
}

template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (const IoError& e) {
        fmt::print(log, "error: {}\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        fmt::print(log, "config error: {}\n", e.what());
        return 1;
    } catch (const ModelError& e) {
        fmt::print(log, "error: {}\n", e.what());
        return 1;
    }
}

std::filesystem::path hardware_path(const RunConfig& cfg) {
    return cfg.config.empty() ? std::filesystem::path(QENERGY_DATA_DIR) / "table1.cfg" : cfg.config;
}

std::string optional_cell(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string{}; }

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
    }
    return cells;
}

std::vector<CalibrationTarget> read_targets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open targets file '{}'", path.string()));
    }
    std::vector<CalibrationTarget> out;
    std::string line;
    std::size_t line_no = 0;
    auto number = [&](const std::string& cell, std::string_view column) {
        try {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            if (used != cell.size()) {
                throw std::invalid_argument(cell);
            }
            return v;
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("targets line {}: bad {} '{}'", line_no, column, cell));
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto cells = split_csv_line(line);
        if (cells.empty() || cells[0].empty() || cells[0].front() == '#' || cells[0] == "setting") {
            continue;
        }
        if (cells.size() < 2 || cells[1].empty()) {
            throw ConfigError(fmt::format("targets line {}: expected 'setting,edp_ratio[,time_ratio[,energy_ratio]]'",
                                          line_no));
        }
        CalibrationTarget t;
        t.setting = cells[0];
        t.edp_ratio = number(cells[1], "edp_ratio");
        if (cells.size() > 2 && !cells[2].empty()) {
            t.time_ratio = number(cells[2], "time_ratio");
        }
        if (cells.size() > 3 && !cells[3].empty()) {
            t.energy_ratio = number(cells[3], "energy_ratio");
        }
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace

int cmd_pvc_sweep(const RunConfig& cfg, const PvcSweepOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        const auto set = load_fixtures(cfg.fixtures, cfg.config);
        const auto& fx = set.pvc_fixture(opts.fixture);

        std::vector<PvcSetting> settings;
        if (opts.settings.empty()) {
            settings = fx.sweep_settings();
        } else {
            for (const auto& label : opts.settings) {
                settings.push_back(fx.setting(label));
            }
            if (std::none_of(settings.begin(), settings.end(), [](const PvcSetting& s) { return s.is_stock(); })) {
                settings.insert(settings.begin(), PvcSetting::stock());
            }
        }

        const auto work = fx.workload();
        const MeasurementProtocol protocol{cfg.noise, 0.01, cfg.seed};
        const auto sweep = run_sweep(work, settings, fx.cpu, fx.disk, protocol);

        auto out = open_output(cfg, "pvc_sweep.csv");
        write_sweep_csv(sweep, out);
        close_output(out, cfg, "pvc_sweep.csv");

        double t_max = 2.0;
        for (const auto& p : sweep.points) {
            t_max = std::max(t_max, p.time_ratio);
        }
        auto curve_out = open_output(cfg, "edp_curve.csv");
        write_edp_curve_csv(constant_edp_curve(opts.curve_samples, 0.5, t_max), curve_out);
        close_output(curve_out, cfg, "edp_curve.csv");

        fmt::print(log, "{}: {} settings, stock {:.4g} s / {:.6g} J\n", fx.name, sweep.points.size(),
                   sweep.baseline.absolute_time.value(), sweep.baseline.absolute_energy.value());
        if (opts.max_time_ratio) {
            const auto pick = select_operating_point(sweep, *opts.max_time_ratio);
            fmt::print(log, "selected {} (time ratio {:.4f}, energy ratio {:.4f}) for max time ratio {}\n",
                       pick.setting.label(), pick.time_ratio, pick.energy_ratio, *opts.max_time_ratio);
        }
        return 0;
    });
}

int cmd_qed_sweep(const RunConfig& cfg, const QedSweepOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        const auto set = load_fixtures(cfg.fixtures, cfg.config);
        const auto& fx = set.qed_fixture(opts.fixture);
        const auto table = fx.make_table();

        std::vector<Query> queries;
        if (opts.workload_file) {
            std::ifstream in(*opts.workload_file);
            if (!in) {
                throw ConfigError(fmt::format("cannot open workload file '{}'", opts.workload_file->string()));
            }
            queries = read_workload(in);
        } else {
            queries = fx.make_workload();
        }
        const auto& sizes = opts.batch_sizes.empty() ? fx.batch_sizes : opts.batch_sizes;
        if (sizes.empty()) {
            throw ConfigError("no batch sizes given and the fixture lists none");
        }
        for (const auto k : sizes) {
            if (k == 0 || k > queries.size()) {
                throw ConfigError(fmt::format("batch size {} must lie in [1, {}]", k, queries.size()));
            }
        }

        const ExecutionEnv env{&table, fx.cpu, PvcSetting::stock(), fx.disk, fx.costs};
        const QedOptions qopts{opts.flush_partial ? PartialBatchPolicy::flush : PartialBatchPolicy::reject,
                               UnmergeablePolicy::fall_back_sequential};

        std::ostringstream sweep_csv;
        std::ostringstream runs_csv;
        write_comparison_csv_header(sweep_csv);
        write_run_csv_header(runs_csv);
        for (const auto k : sizes) {
            const std::size_t n = opts.flush_partial ? queries.size() : queries.size() / k * k;
            const std::span<const Query> subset(queries.data(), n);
            const auto seq = run_sequential(subset, env, k);
            const auto qed = run_qed(subset, k, env, qopts);
            const auto cmp = compare_runs(seq, qed);
            write_comparison_csv_row(k, cmp, sweep_csv);
            write_run_csv_rows(seq, fmt::format("sequential-k{}", k), runs_csv);
            write_run_csv_rows(qed, fmt::format("qed-k{}", k), runs_csv);
            for (const auto& w : qed.warnings) {
                fmt::print(log, "warning: {}\n", w);
            }
            fmt::print(log, "batch {:>3} over {} queries: energy {:+.1f}%, response {:+.1f}%, EDP {:+.1f}%\n", k, n,
                       (cmp.energy_ratio - 1.0) * 100.0, (cmp.avg_response_ratio - 1.0) * 100.0,
                       (cmp.edp_ratio - 1.0) * 100.0);
        }

        auto out = open_output(cfg, "qed_sweep.csv");
        out << sweep_csv.str();
        close_output(out, cfg, "qed_sweep.csv");
        auto runs = open_output(cfg, "qed_runs.csv");
        runs << runs_csv.str();
        close_output(runs, cfg, "qed_runs.csv");
        return 0;
    });
}

int cmd_disk_sweep(const RunConfig& cfg, const DiskSweepOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        const auto hw = load_hardware_config(hardware_path(cfg));
        if (opts.block_sizes.empty()) {
            throw ConfigError("no block sizes given");
        }
        std::ostringstream csv;
        csv << "pattern,block_kb,throughput_kb_s,energy_per_kb\n";
        for (const auto pattern : {AccessPattern::sequential, AccessPattern::random}) {
            double first = 0.0;
            for (const auto block : opts.block_sizes) {
                const auto r = disk_read_sim(hw.disk, pattern, block, opts.total_kb);
                csv << fmt::format("{},{},{},{}\n", to_string(pattern), block, r.throughput_kb_s, r.energy_per_kb);
                if (first == 0.0) {
                    first = r.throughput_kb_s;
                }
                fmt::print(log, "{:<10} {:>3} KB: {:.1f} KB/s ({:.3f}x)\n", to_string(pattern), block,
                           r.throughput_kb_s, r.throughput_kb_s / first);
            }
        }
        auto out = open_output(cfg, "disk_sweep.csv");
        out << csv.str();
        close_output(out, cfg, "disk_sweep.csv");
        return 0;
    });
}

int cmd_calibrate(const RunConfig& cfg, const CalibrateOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        const auto set = load_fixtures(cfg.fixtures, cfg.config);
        const auto& fx = set.pvc_fixture(opts.fixture);
        const auto targets = opts.targets_file ? read_targets(*opts.targets_file) : fx.targets;
        if (targets.empty()) {
            throw ConfigError(fmt::format("fixture '{}' has no targets and no --targets file was given", fx.name));
        }

        struct Row {
            CalibrationTarget target;
            PvcSetting setting;
            std::optional<double> alpha;
            std::string status = "ok";
        };
        std::vector<Row> rows;
        for (const auto& t : targets) {
            Row row{t, parse_setting_label(t.setting, fx.cpu), std::nullopt};
            if (!(t.edp_ratio > 0.0)) {
                throw ConfigError(fmt::format("target '{}' needs a positive edp_ratio", t.setting));
            }
            if (t.time_ratio && row.setting.underclock > 0.0) {
                try {
                    row.alpha = calibrate_cpu_fraction(*t.time_ratio, row.setting.underclock);
                } catch (const ModelError& e) {
                    row.status = "infeasible_time_ratio";
                    fmt::print(log, "{}: {}\n", t.setting, e.what());
                }
            }
            rows.push_back(std::move(row));
        }

        // Rows without a usable time target borrow the mean of the fitted
        // shares, or the fixture's own share when none was fitted.
        double sum = 0.0;
        std::size_t fitted = 0;
        for (const auto& r : rows) {
            if (r.alpha) {
                sum += *r.alpha;
                ++fitted;
            }
        }
        const double fallback = fitted > 0 ? sum / static_cast<double>(fitted) : fx.profile.cpu_fraction();

        const auto work = fx.workload();
        std::ostringstream csv;
        csv << "setting_label,underclock_pct,downgrade,target_edp_ratio,target_time_ratio,alpha,voltage_factor,"
               "voltage_factor_cpu_bound,model_time_ratio,model_energy_ratio,model_edp_ratio,edp_residual,"
               "time_residual,status\n";
        for (auto& r : rows) {
            const double alpha = r.alpha.value_or(fallback);
            const double u = r.setting.underclock;
            const double v = calibrate_voltage_factor(r.target.edp_ratio, u, alpha);
            const double v_cpu = calibrate_voltage_factor(r.target.edp_ratio, u);

            std::string model_t;
            std::string model_e;
            std::string model_edp;
            std::string edp_res;
            std::string time_res;
            PvcSetting s = r.setting;
            s.downgrade.factor = v;
            const bool level_none = s.downgrade.level == DowngradeLevel::none;
            if (v > 1.0 || (level_none && std::abs(v - 1.0) > 1e-9)) {
                if (r.status == "ok") {
                    r.status = "infeasible_voltage";
                }
                fmt::print(log, "{}: voltage factor {:.6f} is not reachable by this setting\n", r.target.setting, v);
            } else {
                if (level_none) {
                    s.downgrade.factor = 1.0;
                }
                const std::vector<PvcSetting> pair{PvcSetting::stock(), s};
                const auto sweep = run_sweep(work, pair, fx.cpu, fx.disk);
                const auto& p = sweep.points[1];
                model_t = fmt::format("{}", p.time_ratio);
                model_e = fmt::format("{}", p.energy_ratio);
                model_edp = fmt::format("{}", p.edp_ratio);
                edp_res = fmt::format("{}", p.edp_ratio - r.target.edp_ratio);
                if (r.target.time_ratio) {
                    time_res = fmt::format("{}", p.time_ratio - *r.target.time_ratio);
                }
            }
            csv << fmt::format("{},{:g},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.setting.label(), u * 100.0,
                               to_string(r.setting.downgrade.level), r.target.edp_ratio,
                               optional_cell(r.target.time_ratio), alpha, v, v_cpu, model_t, model_e, model_edp,
                               edp_res, time_res, r.status);
        }
        auto out = open_output(cfg, "calibration.csv");
        out << csv.str();
        close_output(out, cfg, "calibration.csv");
        fmt::print(log, "{}: calibrated {} targets (CPU share fallback {:.6f})\n", fx.name, rows.size(), fallback);
        return 0;
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Energy/performance simulator for voltage-frequency control and batched query execution"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::string config;
    std::string fixtures = (std::filesystem::path(QENERGY_DATA_DIR) / "fixtures.cfg").string();
    std::string out_dir;
    app.add_option("--config", config, "Hardware config (default: the one named by the fixtures file)");
    app.add_option("--fixtures", fixtures, "Fixtures file")->capture_default_str();
    app.add_option("--out", out_dir, "Output directory (default: $QENERGY_OUT_DIR or ./results)");
    app.add_option("--seed", cfg.seed, "Seed for measurement noise")->capture_default_str();
    app.add_flag("--noise", cfg.noise, "Measure each point five times with 1% noise and keep the trimmed mean");

    PvcSweepOptions pvc;
    auto* pvc_cmd = app.add_subcommand("pvc-sweep", "Sweep underclock/voltage settings over a profile fixture");
    pvc_cmd->add_option("--fixture", pvc.fixture, "Profile fixture name")->capture_default_str();
    pvc_cmd->add_option("--settings", pvc.settings, "Setting labels, e.g. stock,u5-med,u10-small")->delimiter(',');
    pvc_cmd->add_option("--max-time-ratio", pvc.max_time_ratio, "Report the cheapest point within this time ratio");

    QedSweepOptions qed;
    std::string workload;
    auto* qed_cmd = app.add_subcommand("qed-sweep", "Compare batched and sequential execution per batch size");
    qed_cmd->add_option("--fixture", qed.fixture, "Selection fixture name")->capture_default_str();
    qed_cmd->add_option("--batch-sizes", qed.batch_sizes, "Batch sizes, e.g. 35,40,45,50")->delimiter(',');
    qed_cmd->add_option("--workload", workload, "Workload file (table,column,v1;v2 per line)");
    qed_cmd->add_flag("--flush-partial", qed.flush_partial, "Run a trailing partial batch instead of dropping it");

    DiskSweepOptions disk;
    auto* disk_cmd = app.add_subcommand("disk-sweep", "Throughput and energy per KB by block size and pattern");
    disk_cmd->add_option("--block-sizes", disk.block_sizes, "Block sizes in KB")->delimiter(',');
    disk_cmd->add_option("--total-kb", disk.total_kb, "KB read per run")->capture_default_str();

    CalibrateOptions cal;
    std::string targets;
    auto* cal_cmd = app.add_subcommand("calibrate", "Derive voltage factors and CPU share from observed ratios");
    cal_cmd->add_option("--fixture", cal.fixture, "Profile fixture name")->capture_default_str();
    cal_cmd->add_option("--targets", targets, "CSV of setting,edp_ratio[,time_ratio[,energy_ratio]]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    cfg.config = config;
    cfg.fixtures = fixtures;
    if (!out_dir.empty()) {
        cfg.out_dir = out_dir;
    } else if (const char* env = std::getenv("QENERGY_OUT_DIR"); env != nullptr && *env != '\0') {
        cfg.out_dir = env;
    } else {
        cfg.out_dir = "results";
    }
    if (!workload.empty()) {
        qed.workload_file = workload;
    }
    if (!targets.empty()) {
        cal.targets_file = targets;
    }

    for (const auto& [path, what] : {std::pair{cfg.config, "config"}, std::pair{cfg.fixtures, "fixtures"}}) {
        if (!path.empty() && !std::filesystem::exists(path)) {
            fmt::print(err, "config error: {} file '{}' does not exist\n", what, path.string());
            return 1;
        }
    }

    if (*pvc_cmd) {
        return cmd_pvc_sweep(cfg, pvc, out);
    }
    if (*qed_cmd) {
        return cmd_qed_sweep(cfg, qed, out);
    }
    if (*disk_cmd) {
        return cmd_disk_sweep(cfg, disk, out);
    }
    return cmd_calibrate(cfg, cal, out);
}

} // namespace qenergy
