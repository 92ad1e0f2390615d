#pragma once

#include <qenergy/power_model.hpp>
#include <qenergy/workload.hpp>

#include <filesystem>

namespace qenergy::testing {

inline std::filesystem::path data_dir() { return QENERGY_DATA_DIR; }

inline const FixtureSet& fixtures() {
    static const FixtureSet set = load_fixtures(data_dir() / "fixtures.cfg");
    return set;
}

/// Four p-states on a 333 MHz bus, C = 1.
inline CpuModel test_cpu(DowngradePresets presets = {0.9, 0.8}) {
    return CpuModel(megahertz(333.0),
                    {{9, Volts{1.25}}, {8, Volts{1.20}}, {7, Volts{1.15}}, {6, Volts{1.10}}}, 1.0, Watts{2.0},
                    presets);
}

inline DiskModel test_disk() { return DiskModel(Seconds{0.001}, 60.0 * 1024.0, Watts{10.0}, Watts{1.0}); }

inline PvcSetting downgraded(double u, DowngradeLevel level, double factor) {
    PvcSetting s;
    s.underclock = u;
    s.downgrade = {level, factor};
    return s;
}

} // namespace qenergy::testing
