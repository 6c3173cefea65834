#pragma once

#include "pmimo/channel.hpp"
#include "pmimo/precoding.hpp"

#include <vector>

namespace pmimo {

enum class MergeRepresentative { mean, strongest };

/// Delays after collapsing clusters closer than the steering resolution.
struct MergedDelays {
    std::vector<double> delays;  // one per cluster, ascending
    std::vector<int> map;        // original index -> cluster column
};

/// Union-find clustering of delays whose pairwise gap is below T/(eta K).
/// `weights` (e.g. path powers) are only consulted for the strongest-member
/// representative.
MergedDelays merge_delays(const std::vector<double>& delays, int K, double T, double eta,
                          MergeRepresentative representative = MergeRepresentative::mean,
                          const std::vector<double>& weights = {});

/// X = [A_0 S, ..., A_{D-1} S]; column d*L' + l is a_d .* s(tau_l).
struct DesignMatrix {
    MatrixXcd X;
    std::vector<int> merged_map;
    int beams = 0;
    int paths = 0;  // L'
};

DesignMatrix build_design_matrix(const TrainingBlock& pilots, const std::vector<double>& delays,
                                 const SystemParams& params, std::vector<int> merged_map = {});

/// Least-squares amplitudes via Householder QR. Throws SingularSystemError if
/// the Gram matrix X^H X has condition number above condition_cap.
VectorXcd ls_amplitudes(const DesignMatrix& design, const VectorXcd& y, double condition_cap = 1e6);

/// b_hat[d, k] = sum_l beta_hat[d L' + l] exp(-j 2 pi k tau_l / T).
MatrixXcd regenerate_cfr(const VectorXcd& beta_hat, const std::vector<double>& delays, int D, int K, double T);

/// Second-order statistics of the stacked effective amplitudes. R_b is kept
/// factored as (I kron S) R_beta (I kron S^H).
struct EffectiveCovariance {
    MatrixXcd R_beta;              // (D L) x (D L)
    std::vector<double> delays;    // delays defining S
    int D = 0;
    int L = 0;
    int K = 0;
    double T = 0.0;

    MatrixXcd steering() const { return steering_matrix(delays, K, T); }
    /// Materialised (D K) x (D K) R_b, for small cases only.
    MatrixXcd dense_Rb() const;
    /// The D L significant eigenvalues of R_b, descending, from the factored form.
    VectorXd rb_eigenvalues() const;
};

/// Block (d1, d2) of R_beta is diag_l(u_{d1}^H R_{s,l} u_{d2}).
EffectiveCovariance effective_covariance(const MatrixXcd& U_s, const SpatialCovariance& spatial,
                                         const std::vector<double>& delays, const SystemParams& params);

/// Genie linear MMSE estimate of the D x K effective CFR given the exact
/// pilot matrix. Only (D L) x (D L) systems are solved.
MatrixXcd mmse_estimate(const VectorXcd& y, const TrainingBlock& pilots, const EffectiveCovariance& cov, double N0);

}  // namespace pmimo
