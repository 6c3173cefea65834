#pragma once

#include "pmimo/config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pmimo {

/// Aggregated statistics for one sweep value. Theory columns are averaged
/// over profiles; empirical columns over all (profile, realization) trials.
struct PointResult {
    SweepAxis axis = SweepAxis::bits;
    double sweep_value = 0.0;

    double mse_empirical = 0.0;   // LS pipeline, raw sum over (d, k)
    double mse_se = 0.0;
    double mse_exact = 0.0;       // sinc formula with the per-trial delay errors
    double mse_approx = 0.0;
    double mse_worst = 0.0;
    double mmse_theory = 0.0;
    double mmse_empirical = 0.0;
    double mmse_se = 0.0;
    double capacity = 0.0;        // LS estimate fed back
    double capacity_se = 0.0;
    double capacity_ideal = 0.0;  // true effective CSI
    double sigma2_delay = 0.0;    // measured mean squared delay estimation error [s^2]
    std::int64_t unreliable_trials = 0;

    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    /// Non-empty when the point aborted; the numeric fields are then NaN.
    std::string error;
};

struct MseReport {
    std::vector<PointResult> rows;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    int n_profiles = 0;
    int n_realizations = 0;
    double wall_seconds = 0.0;
};

/// Copy of `config` with the sweep axis set to `value`.
ExperimentConfig apply_sweep_value(const ExperimentConfig& config, double value);

/// Run every (profile, realization) trial of one sweep point. Trial streams
/// are derived from (seed, profile, realization), so the result does not
/// depend on `threads`.
PointResult run_point(const ExperimentConfig& config, double sweep_value, int threads = 1);

MseReport sweep(const ExperimentConfig& config, int threads = 1);

inline constexpr const char* kCsvHeader =
    "sweep_axis,sweep_value,mse_empirical,mse_se,mse_exact,mse_approx,mse_worst,mmse_theory,mmse_empirical,"
    "capacity,capacity_se,trials,seed";

std::string csv_text(const MseReport& report);
void emit_csv(const MseReport& report, const std::filesystem::path& path);

/// Deterministic pairwise (tree) summation.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace pmimo
