#include "support.hpp"

#include <qenergy/error.hpp>
#include <qenergy/pvc.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace qenergy;
using qenergy::testing::downgraded;
using qenergy::testing::fixtures;
using qenergy::testing::test_cpu;
using qenergy::testing::test_disk;

namespace {

std::vector<WorkProfile> pure_cpu(std::size_t n = 10) {
    return std::vector<WorkProfile>(n, WorkProfile::make(2e9, 0, AccessPattern::sequential, 1, test_cpu(),
                                                         test_disk()));
}

double model_time(double alpha, double u) { return alpha / (1.0 - u) + 1.0 - alpha; }

} // namespace

TEST(Edp, ProductOfEnergyAndTime) {
    EXPECT_NEAR(edp(Joules{1228.7}, Seconds{48.5}), 59591.95, 1e-6);
    EXPECT_EQ(edp(Joules{0.0}, Seconds{3.0}), 0.0);
    EXPECT_DOUBLE_EQ(edp(Joules{5.0}, Seconds{4.0}), 2.0 * edp(Joules{5.0}, Seconds{2.0}));
    EXPECT_THROW((void)edp(Joules{-1.0}, Seconds{1.0}), ModelError);
}

TEST(TheoreticalEdp, VoltageSquaredOverFrequency) {
    EXPECT_DOUBLE_EQ(theoretical_edp(Volts{1.0}, Hertz{1.0}), 1.0);
    EXPECT_DOUBLE_EQ(theoretical_edp(Volts{1.0}, Hertz{0.5}), 2.0 * theoretical_edp(Volts{1.0}, Hertz{1.0}));
    const double v = calibrate_voltage_factor(0.53, 0.05);
    EXPECT_NEAR(theoretical_edp(Volts{v}, Hertz{0.95}) / theoretical_edp(Volts{1.0}, Hertz{1.0}), 0.53, 1e-12);
    EXPECT_THROW((void)theoretical_edp(Volts{0.0}, Hertz{1.0}), ModelError);
    EXPECT_THROW((void)theoretical_edp(Volts{1.0}, Hertz{0.0}), ModelError);
}

TEST(RunSweep, StockOnly) {
    const std::vector<PvcSetting> settings{PvcSetting::stock()};
    const auto work = pure_cpu();
    const auto s = run_sweep(work, settings, test_cpu(), test_disk());
    ASSERT_EQ(s.points.size(), 1U);
    EXPECT_EQ(s.points[0].time_ratio, 1.0);
    EXPECT_EQ(s.points[0].energy_ratio, 1.0);
    EXPECT_EQ(s.points[0].edp_ratio, 1.0);
    EXPECT_EQ(s.baseline.setting, PvcSetting::stock());
}

TEST(RunSweep, RequiresStock) {
    const std::vector<PvcSetting> settings{downgraded(0.05, DowngradeLevel::medium, 0.8)};
    const auto work = pure_cpu();
    EXPECT_THROW((void)run_sweep(work, settings, test_cpu(), test_disk()), ModelError);
    const std::vector<PvcSetting> ok{PvcSetting::stock()};
    EXPECT_THROW((void)run_sweep(std::vector<WorkProfile>{}, ok, test_cpu(), test_disk()), ModelError);
}

TEST(RunSweep, PureCpuAlgebra) {
    const std::vector<PvcSetting> settings{PvcSetting::stock(), downgraded(0.05, DowngradeLevel::medium, 0.8)};
    const auto work = pure_cpu();
    const auto s = run_sweep(work, settings, test_cpu(), test_disk());
    const auto& p = s.points[1];
    EXPECT_NEAR(p.time_ratio, 1.0 / 0.95, 1e-12);
    EXPECT_NEAR(p.energy_ratio, 0.64, 1e-12);
    EXPECT_NEAR(p.edp_ratio, 0.64 / 0.95, 1e-12);
}

TEST(RunSweep, PointsInRequestOrderAndConsistent) {
    const auto cpu = test_cpu();
    const auto settings = default_sweep_settings(cpu);
    ASSERT_EQ(settings.size(), 7U);
    EXPECT_TRUE(settings[0].is_stock());
    const auto work = std::vector<WorkProfile>(
        3, WorkProfile::make(1e9, 50'000, AccessPattern::random, 8, cpu, test_disk()));
    const auto s = run_sweep(work, settings, cpu, test_disk());
    ASSERT_EQ(s.points.size(), settings.size());
    for (std::size_t i = 0; i < settings.size(); ++i) {
        EXPECT_EQ(s.points[i].setting, settings[i]);
        EXPECT_NEAR(s.points[i].edp_ratio, s.points[i].energy_ratio * s.points[i].time_ratio, 1e-12);
    }
}

TEST(RunSweep, SelectionWorkloadOverload) {
    const auto table = generate_table(5000, 50, 0.1, 1);
    SelectionWorkloadSpec spec;
    spec.query_count = 10;
    const auto queries = gen_selection_workload(spec);
    CostParams costs;
    costs.cycles_scan_per_row = 30.0;
    costs.cycles_per_predicate_term_per_row = 3.0;
    const std::vector<PvcSetting> settings{PvcSetting::stock(), downgraded(0.10, DowngradeLevel::small, 0.9)};
    const auto s = run_sweep(table, queries, settings, test_cpu(), test_disk(), costs);
    EXPECT_NEAR(s.points[1].time_ratio, 1.0 / 0.9, 1e-12);
    EXPECT_NEAR(s.points[1].energy_ratio, 0.81, 1e-12);
}

TEST(RunSweep, NonMonotoneEdpUnderFixedDowngrade) {
    const auto work = pure_cpu();
    for (const double v : {0.71, 0.85, 0.95}) {
        std::vector<PvcSetting> settings{PvcSetting::stock()};
        for (const double u : {0.05, 0.10, 0.15}) {
            settings.push_back(downgraded(u, DowngradeLevel::medium, v));
        }
        const auto s = run_sweep(work, settings, test_cpu(), test_disk());
        EXPECT_LT(s.points[1].edp_ratio, s.points[2].edp_ratio);
        EXPECT_LT(s.points[2].edp_ratio, s.points[3].edp_ratio);
    }
}

TEST(RunSweep, NoiseIsSeededAndTrimmed) {
    const auto work = pure_cpu();
    const auto settings = default_sweep_settings(test_cpu());
    const MeasurementProtocol a{true, 0.01, 7};
    const auto s1 = run_sweep(work, settings, test_cpu(), test_disk(), a);
    const auto s2 = run_sweep(work, settings, test_cpu(), test_disk(), a);
    const auto clean = run_sweep(work, settings, test_cpu(), test_disk());
    bool any_diff = false;
    for (std::size_t i = 0; i < settings.size(); ++i) {
        EXPECT_EQ(s1.points[i].absolute_time, s2.points[i].absolute_time);
        EXPECT_NEAR(s1.points[i].absolute_time / clean.points[i].absolute_time, 1.0, 0.05);
        any_diff = any_diff || s1.points[i].absolute_time != clean.points[i].absolute_time;
    }
    EXPECT_TRUE(any_diff);
    const auto s3 = run_sweep(work, settings, test_cpu(), test_disk(), MeasurementProtocol{true, 0.01, 8});
    EXPECT_NE(s1.points[1].absolute_time, s3.points[1].absolute_time);
}

TEST(EdpCurve, ReciprocalSamples) {
    const auto c = constant_edp_curve(11, 0.5, 2.0);
    ASSERT_EQ(c.samples.size(), 11U);
    EXPECT_DOUBLE_EQ(c.samples.front().time_ratio, 0.5);
    EXPECT_DOUBLE_EQ(c.samples.back().time_ratio, 2.0);
    EXPECT_DOUBLE_EQ(c.samples.back().energy_ratio, 0.5);
    for (const auto& s : c.samples) {
        EXPECT_NEAR(s.energy_ratio * s.time_ratio, 1.0, 1e-9);
    }
    const auto unit = constant_edp_curve(3, 0.5, 1.5);
    EXPECT_DOUBLE_EQ(unit.samples[1].time_ratio, 1.0);
    EXPECT_DOUBLE_EQ(unit.samples[1].energy_ratio, 1.0);
    EXPECT_THROW((void)constant_edp_curve(1, 0.5, 2.0), ModelError);
    EXPECT_THROW((void)constant_edp_curve(5, 0.0, 2.0), ModelError);
    EXPECT_THROW((void)constant_edp_curve(5, 2.0, 1.0), ModelError);
}

TEST(EdpCurve, BelowCurveClassification) {
    EXPECT_TRUE(below_edp_curve(0.51, 1.03));
    EXPECT_FALSE(below_edp_curve(1.0, 1.0));
    EXPECT_FALSE(below_edp_curve(0.99, 1.05));
}

TEST(SelectOperatingPoint, StockWhenNothingElseFits) {
    const auto work = pure_cpu();
    const auto s = run_sweep(work, default_sweep_settings(test_cpu()), test_cpu(), test_disk());
    EXPECT_TRUE(select_operating_point(s, 1.0).setting.is_stock());
    EXPECT_THROW((void)select_operating_point(s, 0.5), ModelError);
}

TEST(SelectOperatingPoint, PicksSettingAOnCommercialFixture) {
    const auto& fx = fixtures().pvc_fixture("q5_commercial_warm");
    const auto work = fx.workload();
    const auto s = run_sweep(work, fx.sweep_settings(), fx.cpu, fx.disk);
    const auto pick = select_operating_point(s, 1.05);
    EXPECT_EQ(pick.setting.label(), "u5-med");
    // The slower points cost more energy than A as well as more time.
    for (const auto& p : s.points) {
        if (p.setting.underclock > 0.05 && p.setting.downgrade.level == DowngradeLevel::medium) {
            EXPECT_GT(p.time_ratio, pick.time_ratio);
            EXPECT_GT(p.energy_ratio, pick.energy_ratio);
        }
    }
}

TEST(SelectOperatingPoint, TieBreaksAndScaleInvariance) {
    SweepResult s;
    auto point = [](double t, double e, double u) {
        OperatingPoint p;
        p.setting.underclock = u;
        p.time_ratio = t;
        p.energy_ratio = e;
        p.edp_ratio = t * e;
        p.absolute_time = Seconds{10.0 * t};
        p.absolute_energy = Joules{100.0 * e};
        return p;
    };
    s.points = {point(1.0, 1.0, 0.0), point(1.04, 0.6, 0.10), point(1.02, 0.6, 0.15), point(1.02, 0.6, 0.05),
                point(1.2, 0.3, 0.2)};
    const auto pick = select_operating_point(s, 1.05);
    EXPECT_DOUBLE_EQ(pick.setting.underclock, 0.05);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int i = 0; i < 50; ++i) {
        const double k = scale(rng);
        SweepResult scaled = s;
        for (auto& p : scaled.points) {
            p.absolute_time = p.absolute_time * k;
            p.absolute_energy = p.absolute_energy * k;
        }
        EXPECT_EQ(select_operating_point(scaled, 1.05).setting, pick.setting);
    }
}

TEST(CalibrateVoltage, InvertsCpuBoundModel) {
    EXPECT_DOUBLE_EQ(calibrate_voltage_factor(1.0, 0.0), 1.0);
    EXPECT_NEAR(calibrate_voltage_factor(0.53, 0.05), 0.7096, 1e-4);
    EXPECT_NEAR(calibrate_voltage_factor(0.84, 0.05), 0.8934, 1e-4);
    EXPECT_THROW((void)calibrate_voltage_factor(0.0, 0.05), ModelError);
    EXPECT_THROW((void)calibrate_voltage_factor(1.0, 1.0), ModelError);
    for (const double r : {0.53, 0.62, 0.77}) {
        const double v = calibrate_voltage_factor(r, 0.10, 0.57);
        EXPECT_NEAR(v * v * model_time(0.57, 0.10), r, 1e-12);
    }
}

TEST(CalibrateCpuFraction, BoundariesAndExample) {
    EXPECT_NEAR(calibrate_cpu_fraction(1.0 / 0.95, 0.05), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(calibrate_cpu_fraction(1.0, 0.05), 0.0);
    EXPECT_NEAR(calibrate_cpu_fraction(1.03, 0.05), 0.57, 1e-12);
    EXPECT_THROW((void)calibrate_cpu_fraction(0.99, 0.05), ModelError);
    EXPECT_THROW((void)calibrate_cpu_fraction(1.06, 0.05), ModelError);
    EXPECT_THROW((void)calibrate_cpu_fraction(1.01, 0.0), ModelError);
}

TEST(CalibrateCpuFraction, RoundTripsForwardModel) {
    for (const double u : {0.05, 0.10, 0.15, 0.4}) {
        for (int i = 0; i <= 20; ++i) {
            const double alpha = i / 20.0;
            EXPECT_NEAR(calibrate_cpu_fraction(model_time_ratio(alpha, u), u), alpha, 1e-12);
        }
    }
}

TEST(TrimmedMean, DropsExtremes) {
    EXPECT_DOUBLE_EQ(trimmed_mean_of_five(std::vector<double>{1, 2, 3, 4, 5}), 3.0);
    EXPECT_DOUBLE_EQ(trimmed_mean_of_five(std::vector<double>{5, 1, 3, 2, 4}), 3.0);
    EXPECT_DOUBLE_EQ(trimmed_mean_of_five(std::vector<double>(5, 2.5)), 2.5);
    EXPECT_DOUBLE_EQ(trimmed_mean_of_five(std::vector<double>{100, 1, 2, 3, -50}), 2.0);
    EXPECT_THROW((void)trimmed_mean_of_five(std::vector<double>{1, 2, 3, 4}), ModelError);
    EXPECT_THROW((void)trimmed_mean_of_five(std::vector<double>{1, 2, 3, 4, 5, 6}), ModelError);
}

TEST(TrimmedMean, PermutationInvariantAndBounded) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> d(0.0, 10.0);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> xs(5);
        for (auto& x : xs) {
            x = d(rng);
        }
        const double m = trimmed_mean_of_five(xs);
        std::shuffle(xs.begin(), xs.end(), rng);
        EXPECT_EQ(trimmed_mean_of_five(xs), m);
        EXPECT_GE(m, *std::min_element(xs.begin(), xs.end()));
        EXPECT_LE(m, *std::max_element(xs.begin(), xs.end()));
    }
}

TEST(SweepCsv, SchemaAndFlags) {
    const auto work = pure_cpu();
    const std::vector<PvcSetting> settings{PvcSetting::stock(), downgraded(0.05, DowngradeLevel::medium, 0.7)};
    std::ostringstream out;
    write_sweep_csv(run_sweep(work, settings, test_cpu(), test_disk()), out);
    const auto text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "setting_label,underclock_pct,downgrade,time_s,cpu_energy_j,time_ratio,energy_ratio,edp_ratio,"
              "below_edp_curve");
    EXPECT_NE(text.find("\nstock,0,none,"), std::string::npos);
    EXPECT_NE(text.find("\nu5-med,5,medium,"), std::string::npos);
    EXPECT_NE(text.find(",true\n"), std::string::npos);
    std::ostringstream curve;
    write_edp_curve_csv(constant_edp_curve(2, 1.0, 2.0), curve);
    EXPECT_EQ(curve.str(), "energy_ratio,time_ratio\n1,1\n0.5,2\n");
}
