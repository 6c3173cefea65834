#pragma once

#include "pmimo/amp_est.hpp"
#include "pmimo/types.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pmimo {

enum class SweepAxis { bits, sigma2, snr };
enum class DelaySource { esprit, synthetic };

struct Estimators {
    bool ls_parametric = true;
    bool mmse_genie = true;
    bool operator==(const Estimators&) const = default;
};

/// One Monte-Carlo experiment. `params.N0` always follows `snr_db` under the
/// unit-power convention N0 = 10^(-snr_db / 10).
struct ExperimentConfig {
    SystemParams params;
    double snr_db = 10.0;
    int n_subpaths = 20;
    double pdp_decay = 1.25e-6;          // exponential PDP constant [s]
    std::optional<double> uplink_pdp_decay;

    int n_profiles = 20;
    int n_realizations = 500;

    SweepAxis sweep_axis = SweepAxis::bits;
    std::vector<double> sweep_values;

    int bits = 8;                         // B when not swept
    double sigma2_db = -std::numeric_limits<double>::infinity();  // relative to tau_max^2/12

    DelaySource delay_source = DelaySource::synthetic;
    Estimators estimators;
    std::uint64_t seed = 1;

    double eta = 1.0;
    std::optional<double> min_gap;        // default T/K
    double condition_cap = 1e6;
    std::optional<double> uplink_snr_db;  // noiseless uplink CFRs when unset
    int max_redraws = 10000;
    MergeRepresentative merge_representative = MergeRepresentative::mean;

    bool operator==(const ExperimentConfig&) const = default;

    /// Set snr_db and keep params.N0 consistent.
    void set_snr_db(double db);
};

/// Malformed configuration; `keys()` lists every offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& what, std::vector<std::string> keys)
        : std::invalid_argument(what), keys_(std::move(keys))
    {
    }
    const std::vector<std::string>& keys() const { return keys_; }

private:
    std::vector<std::string> keys_;
};

/// Parse `key = value` lines (`#` starts a comment). Missing keys keep their
/// defaults; unknown, duplicate or invalid keys are all reported at once.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& config);

/// FNV-1a over the canonical text form.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Cross-field validation (also run by parse_config).
void validate(const ExperimentConfig& config);

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& s);

double noise_from_snr_db(double snr_db);

}  // namespace pmimo
