#pragma once

#include "pmimo/channel.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace pmimo {

/// sin(x)/x with the removable singularity filled in.
template <class Real>
Real sinc(Real x)
{
    if (std::abs(x) < Real(1e-4)) {
        const Real x2 = x * x;
        return Real(1) - x2 / Real(6) + x2 * x2 / Real(120);
    }
    return std::sin(x) / x;
}

/// Everything the closed-form MSE expressions need for one profile.
struct TheoryInputs {
    std::vector<double> traces;   // Tr{U_s^H R_{s,l} U_s}
    double trace_total = 0.0;     // Tr{U_s^H R_s U_s}
    SystemParams params;
    int B = 0;
    double sigma2 = 0.0;          // delay estimation error variance [s^2]
    std::optional<std::vector<double>> delay_errors;  // hat tau_l - tau_l
};

TheoryInputs theory_inputs(const MatrixXcd& U_s, const SpatialCovariance& spatial, const SystemParams& params, int B,
                           double sigma2);

/// sum_{d,k} |b_hat - b|^2 for one trial.
double mse_empirical(const MatrixXcd& b_hat, const MatrixXcd& b);

/// K sum_l tr_l (1 - sinc^2(pi e_l K / T)) + N0 L D.
double mse_exact(const TheoryInputs& in);

/// Small-error form: (pi^2 K^3 / 3T^2) tr (tau_max^2 / (12 4^B) + sigma^2) + N0 L D.
double mse_approx(const TheoryInputs& in);

/// mse_approx with the trace replaced by its upper bound M.
double mse_worst_case(const SystemParams& params, int B, double sigma2);

/// N0 sum_i lambda_i / (lambda_i + N0) over the significant R_b eigenvalues.
double mmse_theoretical(std::span<const double> rb_eigenvalues, double N0);

/// Mean spectral efficiency with per-subcarrier matched beamforming on the
/// estimate: (1/K) sum_k log2(1 + |b[k]^T v[k]|^2 / N0), v[k] = conj(b_hat[k]) / |b_hat[k]|.
double capacity(const MatrixXcd& b_true, const MatrixXcd& b_est, double N0);

/// |sinc(x) - (1 - x^2/6)| with x = pi * delay_error * K / T.
double sinc_approx_error(double delay_error, int K, double T);

}  // namespace pmimo
