#pragma once

#include <qenergy/engine.hpp>
#include <qenergy/power_model.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace qenergy {

/// One setting's cost relative to the stock setting. `absolute_energy` is
/// CPU energy, the quantity the ratios compare.
struct OperatingPoint {
    PvcSetting setting;
    double time_ratio = 1.0;
    double energy_ratio = 1.0;
    double edp_ratio = 1.0;
    Seconds absolute_time{};
    Joules absolute_energy{};
};

struct SweepResult {
    std::vector<OperatingPoint> points; // one per requested setting, in request order
    OperatingPoint baseline;
};

struct EdpSample {
    double energy_ratio = 1.0;
    double time_ratio = 1.0;
};

/// Points of constant energy-delay product, e * t = 1, in ratio space.
struct EdpCurve {
    std::vector<EdpSample> samples;
};

/// Energy-delay product in joule-seconds.
[[nodiscard]] double edp(Joules energy, Seconds time);

/// V^2 / F; only meaningful as a ratio between settings.
[[nodiscard]] double theoretical_edp(Volts voltage, Hertz frequency);

/// Optional measurement jitter. When enabled every point is "measured"
/// five times with multiplicative Gaussian noise on elapsed time and the
/// trimmed mean of the five readings is kept.
struct MeasurementProtocol {
    bool noise = false;
    double noise_sigma = 0.01;
    std::uint64_t seed = 0;
};

using SettingRunner = std::function<ExecutionReport(const PvcSetting&)>;

/// Runs `run` for every setting and forms ratios against the stock point.
/// `settings` must contain the stock setting.
[[nodiscard]] SweepResult run_sweep(const SettingRunner& run, std::span<const PvcSetting> settings,
                                    const MeasurementProtocol& protocol = {});

/// Sweep over a workload of abstract profiles run back to back.
[[nodiscard]] SweepResult run_sweep(std::span<const WorkProfile> work, std::span<const PvcSetting> settings,
                                    const CpuModel& cpu, const DiskModel& disk,
                                    const MeasurementProtocol& protocol = {});

/// Sweep over a selection workload executed query by query on `table`.
[[nodiscard]] SweepResult run_sweep(const Table& table, std::span<const Query> queries,
                                    std::span<const PvcSetting> settings, const CpuModel& cpu, const DiskModel& disk,
                                    const CostParams& costs, const MeasurementProtocol& protocol = {});

/// Stock plus {5, 10, 15}% underclocking for each of the small and medium
/// downgrade presets of `cpu`.
[[nodiscard]] std::vector<PvcSetting> default_sweep_settings(const CpuModel& cpu);

/// `n_samples` points evenly spaced in time ratio over [t_min, t_max].
[[nodiscard]] EdpCurve constant_edp_curve(std::size_t n_samples, double t_min, double t_max);

/// True when the point improves EDP over stock (lies under e * t = 1).
[[nodiscard]] bool below_edp_curve(double energy_ratio, double time_ratio) noexcept;
[[nodiscard]] bool below_edp_curve(const OperatingPoint& point) noexcept;

/// Lowest-energy point whose time ratio stays within `max_time_ratio`; ties
/// go to the faster point, then to the smaller underclock.
[[nodiscard]] OperatingPoint select_operating_point(const SweepResult& sweep, double max_time_ratio);

/// Time ratio of work with CPU share `cpu_fraction` when the clock drops by `u`.
[[nodiscard]] double model_time_ratio(double cpu_fraction, double underclock);

/// Inverts edp_ratio = v^2 / (1 - u) for CPU-bound work.
[[nodiscard]] double calibrate_voltage_factor(double observed_edp_ratio, double underclock);

/// Inverts edp_ratio = v^2 * model_time_ratio(cpu_fraction, u).
[[nodiscard]] double calibrate_voltage_factor(double observed_edp_ratio, double underclock, double cpu_fraction);

/// Solves observed = a / (1 - u) + (1 - a) for the CPU share a. Throws
/// ModelError when no a in [0, 1] explains the observation.
[[nodiscard]] double calibrate_cpu_fraction(double observed_time_ratio, double underclock);

/// Drops the smallest and largest of exactly five readings and averages the rest.
[[nodiscard]] double trimmed_mean_of_five(std::span<const double> samples);

/// `setting_label,underclock_pct,downgrade,time_s,cpu_energy_j,time_ratio,energy_ratio,edp_ratio,below_edp_curve`
void write_sweep_csv(const SweepResult& sweep, std::ostream& out);
/// `energy_ratio,time_ratio`
void write_edp_curve_csv(const EdpCurve& curve, std::ostream& out);

} // namespace qenergy
