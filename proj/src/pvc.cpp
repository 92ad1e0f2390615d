#include <qenergy/error.hpp>
#include <qenergy/pvc.hpp>
#include <qenergy/qed.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <random>

namespace qenergy {

namespace {

constexpr double kFeasibilitySlack = 1e-12;

Seconds measured_elapsed(const ExecutionReport& report, std::size_t point_index, const MeasurementProtocol& protocol) {
    if (!protocol.noise) {
        return report.elapsed;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(protocol.seed), static_cast<std::uint32_t>(protocol.seed >> 32),
                      static_cast<std::uint32_t>(point_index)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> jitter(0.0, protocol.noise_sigma);
    std::array<double, 5> runs{};
    for (auto& r : runs) {
        r = report.elapsed.value() * (1.0 + jitter(rng));
    }
    return Seconds{trimmed_mean_of_five(runs)};
}

} // namespace

double edp(Joules energy, Seconds time) {
    if (energy.value() < 0.0 || time.value() < 0.0) {
        throw ModelError("EDP needs non-negative energy and time");
    }
    return energy.value() * time.value();
}

double theoretical_edp(Volts voltage, Hertz frequency) {
    if (!(voltage.value() > 0.0 && frequency.value() > 0.0)) {
        throw ModelError("theoretical EDP needs positive voltage and frequency");
    }
    return voltage.value() * voltage.value() / frequency.value();
}

SweepResult run_sweep(const SettingRunner& run, std::span<const PvcSetting> settings,
                      const MeasurementProtocol& protocol) {
    const auto stock_it = std::find_if(settings.begin(), settings.end(), [](const PvcSetting& s) { return s.is_stock(); });
    if (stock_it == settings.end()) {
        throw ModelError("a sweep must include the stock setting");
    }
    if (protocol.noise && !(protocol.noise_sigma >= 0.0)) {
        throw ModelError("noise sigma must be non-negative");
    }

    struct Measured {
        Seconds time;
        Joules energy;
    };
    std::vector<Measured> measured;
    measured.reserve(settings.size());
    for (std::size_t i = 0; i < settings.size(); ++i) {
        const auto report = run(settings[i]);
        measured.push_back({measured_elapsed(report, i, protocol), report.cpu_energy});
    }

    const auto& stock = measured[static_cast<std::size_t>(stock_it - settings.begin())];
    if (!(stock.time.value() > 0.0 && stock.energy.value() > 0.0)) {
        throw ModelError("stock run must take positive time and CPU energy");
    }
    SweepResult result;
    result.points.reserve(settings.size());
    for (std::size_t i = 0; i < settings.size(); ++i) {
        OperatingPoint p;
        p.setting = settings[i];
        p.absolute_time = measured[i].time;
        p.absolute_energy = measured[i].energy;
        p.time_ratio = measured[i].time / stock.time;
        p.energy_ratio = measured[i].energy / stock.energy;
        p.edp_ratio = p.energy_ratio * p.time_ratio;
        result.points.push_back(p);
    }
    result.baseline = result.points[static_cast<std::size_t>(stock_it - settings.begin())];
    return result;
}

SweepResult run_sweep(std::span<const WorkProfile> work, std::span<const PvcSetting> settings, const CpuModel& cpu,
                      const DiskModel& disk, const MeasurementProtocol& protocol) {
    if (work.empty()) {
        throw ModelError("a sweep needs at least one work profile");
    }
    return run_sweep([&](const PvcSetting& s) { return execute_profiles(work, cpu, s, disk); }, settings, protocol);
}

SweepResult run_sweep(const Table& table, std::span<const Query> queries, std::span<const PvcSetting> settings,
                      const CpuModel& cpu, const DiskModel& disk, const CostParams& costs,
                      const MeasurementProtocol& protocol) {
    auto runner = [&](const PvcSetting& s) {
        const ExecutionEnv env{&table, cpu, s, disk, costs};
        const auto run = run_sequential(queries, env);
        ExecutionReport total;
        total.elapsed = run.total_elapsed;
        total.cpu_energy = run.total_cpu_energy;
        total.disk_energy = run.total_disk_energy;
        return total;
    };
    return run_sweep(runner, settings, protocol);
}

std::vector<PvcSetting> default_sweep_settings(const CpuModel& cpu) {
    std::vector<PvcSetting> out{PvcSetting::stock()};
    for (const auto level : {DowngradeLevel::small, DowngradeLevel::medium}) {
        for (const double u : {0.05, 0.10, 0.15}) {
            PvcSetting s;
            s.underclock = u;
            s.downgrade = cpu.downgrade(level);
            out.push_back(s);
        }
    }
    return out;
}

EdpCurve constant_edp_curve(std::size_t n_samples, double t_min, double t_max) {
    if (n_samples < 2) {
        throw ModelError("an EDP curve needs at least two samples");
    }
    if (!(t_min > 0.0 && t_max > t_min && std::isfinite(t_max))) {
        throw ModelError("EDP curve range must satisfy 0 < t_min < t_max < inf");
    }
    EdpCurve curve;
    curve.samples.reserve(n_samples);
    const double step = (t_max - t_min) / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = i + 1 == n_samples ? t_max : t_min + step * static_cast<double>(i);
        curve.samples.push_back({1.0 / t, t});
    }
    return curve;
}

bool below_edp_curve(double energy_ratio, double time_ratio) noexcept { return energy_ratio * time_ratio < 1.0; }

bool below_edp_curve(const OperatingPoint& point) noexcept {
    return below_edp_curve(point.energy_ratio, point.time_ratio);
}

OperatingPoint select_operating_point(const SweepResult& sweep, double max_time_ratio) {
    const OperatingPoint* best = nullptr;
    for (const auto& p : sweep.points) {
        if (p.time_ratio > max_time_ratio) {
            continue;
        }
        const bool better = best == nullptr || p.energy_ratio < best->energy_ratio ||
                            (p.energy_ratio == best->energy_ratio &&
                             (p.time_ratio < best->time_ratio ||
                              (p.time_ratio == best->time_ratio && p.setting.underclock < best->setting.underclock)));
        if (better) {
            best = &p;
        }
    }
    if (best == nullptr) {
        throw ModelError(fmt::format("no operating point meets time ratio {}", max_time_ratio));
    }
    return *best;
}

double model_time_ratio(double cpu_fraction, double underclock) {
    if (!(underclock >= 0.0 && underclock < 1.0)) {
        throw ModelError("underclock fraction must lie in [0, 1)");
    }
    return cpu_fraction / (1.0 - underclock) + (1.0 - cpu_fraction);
}

double calibrate_voltage_factor(double observed_edp_ratio, double underclock) {
    return calibrate_voltage_factor(observed_edp_ratio, underclock, 1.0);
}

double calibrate_voltage_factor(double observed_edp_ratio, double underclock, double cpu_fraction) {
    if (!(observed_edp_ratio > 0.0)) {
        throw ModelError("observed EDP ratio must be positive");
    }
    if (!(cpu_fraction >= 0.0 && cpu_fraction <= 1.0)) {
        throw ModelError("CPU fraction must lie in [0, 1]");
    }
    return std::sqrt(observed_edp_ratio / model_time_ratio(cpu_fraction, underclock));
}

double calibrate_cpu_fraction(double observed_time_ratio, double underclock) {
    if (!(underclock > 0.0 && underclock < 1.0)) {
        throw ModelError("CPU fraction calibration needs an underclock in (0, 1)");
    }
    const double upper = 1.0 / (1.0 - underclock);
    if (!(observed_time_ratio >= 1.0 - kFeasibilitySlack && observed_time_ratio <= upper + kFeasibilitySlack)) {
        throw ModelError(fmt::format("time ratio {} is outside [1, {}] and cannot come from a 1/F slowdown of a "
                                     "{}% underclock",
                                     observed_time_ratio, upper, underclock * 100.0));
    }
    const double alpha = (observed_time_ratio - 1.0) * (1.0 - underclock) / underclock;
    return std::clamp(alpha, 0.0, 1.0);
}

double trimmed_mean_of_five(std::span<const double> samples) {
    if (samples.size() != 5) {
        throw ModelError(fmt::format("trimmed mean needs exactly 5 samples, got {}", samples.size()));
    }
    std::array<double, 5> sorted{};
    std::copy(samples.begin(), samples.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    return (sorted[1] + sorted[2] + sorted[3]) / 3.0;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
    out << "setting_label,underclock_pct,downgrade,time_s,cpu_energy_j,time_ratio,energy_ratio,edp_ratio,"
           "below_edp_curve\n";
    for (const auto& p : sweep.points) {
        out << fmt::format("{},{:g},{},{},{},{},{},{},{}\n", p.setting.label(), p.setting.underclock * 100.0,
                           to_string(p.setting.downgrade.level), p.absolute_time.value(), p.absolute_energy.value(),
                           p.time_ratio, p.energy_ratio, p.edp_ratio, below_edp_curve(p) ? "true" : "false");
    }
}

void write_edp_curve_csv(const EdpCurve& curve, std::ostream& out) {
    out << "energy_ratio,time_ratio\n";
    for (const auto& s : curve.samples) {
        out << fmt::format("{},{}\n", s.energy_ratio, s.time_ratio);
    }
}

} // namespace qenergy
