#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qenergy {

/// Options shared by every subcommand.
struct RunConfig {
    std::filesystem::path config;   ///< hardware file; empty = the one the fixtures file names
    std::filesystem::path fixtures; ///< fixtures file
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    bool noise = false;
};

struct PvcSweepOptions {
    std::string fixture = "q5_commercial_warm";
    std::vector<std::string> settings; ///< empty = the seven default settings
    std::optional<double> max_time_ratio;
    std::size_t curve_samples = 41;
};

struct QedSweepOptions {
    std::string fixture = "qed_lineitem";
    std::vector<std::size_t> batch_sizes; ///< empty = the fixture's list
    std::optional<std::filesystem::path> workload_file;
    bool flush_partial = false;
};

struct DiskSweepOptions {
    std::vector<std::uint64_t> block_sizes{4, 8, 16, 32};
    std::uint64_t total_kb = 1'600'000;
};

struct CalibrateOptions {
    std::string fixture = "q5_commercial_warm";
    std::optional<std::filesystem::path> targets_file; ///< CSV `setting,edp_ratio,time_ratio,energy_ratio`
};

/// Each command writes its CSV files into `cfg.out_dir` (created if absent)
/// and returns the process exit code. Diagnostics go to `log`.
int cmd_pvc_sweep(const RunConfig& cfg, const PvcSweepOptions& opts, std::ostream& log);
int cmd_qed_sweep(const RunConfig& cfg, const QedSweepOptions& opts, std::ostream& log);
int cmd_disk_sweep(const RunConfig& cfg, const DiskSweepOptions& opts, std::ostream& log);
int cmd_calibrate(const RunConfig& cfg, const CalibrateOptions& opts, std::ostream& log);

/// Parses arguments and dispatches. `QENERGY_OUT_DIR` replaces the default
/// output directory when `--out` is not given.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace qenergy
