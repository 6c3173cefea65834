#pragma once

#include "pmimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pmimo {

/// Delays through the BS -> UE chain: truth, BS estimate, quantized value.
struct DelayReport {
    std::vector<double> true_delays;
    std::vector<double> est_delays;             // tilde tau, matched to true_delays
    std::vector<std::int64_t> quant_indices;
    std::vector<double> quant_delays;           // hat tau
    int B = 0;
    double sigma2_est = 0.0;                    // s^2
    bool unreliable = false;                    // set by ESPRIT
};

/// R_f = (1/M) sum_m h_m h_m^H over the rows of an M x K uplink CFR matrix.
MatrixXcd freq_covariance(const MatrixXcd& cfr_ul);

enum class EspritVariant { least_squares };

struct EspritResult {
    std::vector<double> delays;  // ascending, in [0, T)
    bool unreliable = false;     // some rotation eigenvalue strayed from the unit circle
};

/// Shift-invariance delay estimation on a K x K frequency covariance.
EspritResult esprit(const MatrixXcd& R_f, int L, double T, EspritVariant variant = EspritVariant::least_squares);

/// tilde tau_l = tau_l + N(0, sigma2), clamped into [0, tau_max].
std::vector<double> synth_estimate(const std::vector<double>& true_delays, double sigma2, double tau_max,
                                   Stream& rng);

struct QuantizedDelay {
    std::int64_t index;
    double tau_hat;
};

/// Mid-rise uniform quantizer on [0, tau_max] with 2^B cells and
/// reconstruction at cell centres. Out-of-range inputs are clamped.
template <class Real>
QuantizedDelay quantize(Real tau, int B, Real tau_max)
{
    if (B < 1 || B > 52) {
        throw std::invalid_argument("quantize: B must lie in [1, 52]");
    }
    const std::int64_t cells = std::int64_t{1} << B;
    const Real delta = tau_max / static_cast<Real>(cells);
    const Real clamped = std::clamp(tau, Real(0), tau_max);
    const std::int64_t index = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(clamped / delta)), cells - 1);
    return {index, (static_cast<Real>(index) + Real(0.5)) * delta};
}

double dequantize(std::int64_t index, int B, double tau_max);

/// Quantization step tau_max / 2^B.
double quantization_step(int B, double tau_max);

/// BS -> UE delay-index link. Error free; a seam for impaired links.
std::vector<std::int64_t> feedforward(std::span<const std::int64_t> indices);

/// Pair estimated delays with true ones (both sorted, equal counts; sorted
/// order is the optimal 1-D assignment for squared error).
std::vector<double> match_to_truth(std::vector<double> est, const std::vector<double>& truth);

/// Mean over paths of the squared matched delay error.
double matched_sq_error(const std::vector<double>& est, const std::vector<double>& truth);

/// Estimation-error variance expressed in dB relative to tau_max^2 / 12.
double sigma2_from_db(double db, double tau_max);
double sigma2_to_db(double sigma2, double tau_max);

/// Estimate, quantize and feed forward one set of delays.
DelayReport report_delays(const std::vector<double>& true_delays, const std::vector<double>& est_delays, int B,
                          double tau_max, double sigma2);

struct Sigma2Measurement {
    double sigma2 = 0.0;
    int unreliable_trials = 0;
};

/// Empirical ESPRIT error variance: n_trials independent uplink realizations
/// of `profile`, optionally with additive CFR noise at uplink_snr_db.
Sigma2Measurement measure_sigma2(const SystemParams& params, const MultipathProfile& profile, int n_trials,
                                 Stream& rng, std::optional<double> uplink_snr_db = std::nullopt);

/// Adds CN(0, noise_var) to every entry.
void add_cfr_noise(MatrixXcd& cfr, double noise_var, Stream& rng);

}  // namespace pmimo
