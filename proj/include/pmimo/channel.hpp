#pragma once

#include "pmimo/random.hpp"
#include "pmimo/types.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace pmimo {

/// Ground-truth geometry of one user: path delays, powers and per-path
/// subpath departure angles (radians). Angles are shared by uplink and
/// downlink; only the ray gains differ between the two links.
struct MultipathProfile {
    std::vector<double> delays;                        // seconds, ascending
    std::vector<double> powers;                        // downlink sigma_l^2, sums to 1
    std::vector<double> powers_ul;                     // uplink sigma_l^2, sums to 1
    std::vector<std::vector<double>> subpath_angles;   // L x N_p

    int paths() const { return static_cast<int>(delays.size()); }

    /// Throws std::invalid_argument if the profile breaks an invariant.
    void validate(double min_gap) const;
};

struct ProfileOptions {
    /// Minimum pairwise delay gap; NaN selects T/K.
    double min_gap = std::numeric_limits<double>::quiet_NaN();
    int max_redraws = 10000;
    /// Uplink PDP decay constant; unset means uplink powers equal downlink ones.
    std::optional<double> uplink_decay;
};

double default_min_gap(const SystemParams& params);

/// Exponential PDP with uniform delays on [0, tau_max] and a random angular
/// cluster per path (uniform centre in [-pi, pi), spread in [0, pi/2]).
MultipathProfile make_profile(const SystemParams& params, double decay, int n_subpaths, Stream& rng,
                              const ProfileOptions& options = {});

struct SpatialCovariance {
    std::vector<MatrixXcd> per_path;   // R_{s,l}
    MatrixXcd total;                   // R_s
};

/// Half-wavelength ULA ray model:
/// R_{s,l}[m,n] = (sigma_l^2 / N_p) sum_i exp(-j pi (m - n) sin theta_{l,i}).
SpatialCovariance spatial_covariance(const MultipathProfile& profile, int M);

/// Array response of the ULA for departure angle theta: entry m = exp(-j pi m sin theta).
VectorXcd array_response(double theta, int M);

struct ChannelRealization {
    MatrixXcd alpha;     // M x L downlink path amplitudes
    MatrixXcd alpha_ul;  // M x L uplink path amplitudes
    MatrixXcd cfr;       // M x K downlink CFR
    MatrixXcd cfr_ul;    // M x K uplink CFR
};

/// Draws independent complex-Gaussian ray gains for the downlink and uplink.
ChannelRealization realize(const MultipathProfile& profile, const SystemParams& params, Stream& rng);

/// Frequency-domain steering vector, entry k = exp(-j 2 pi k tau / T).
template <class Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> steering_vector(Real tau, int K, Real T)
{
    if (!(tau >= Real(0)) || !(tau < T)) {
        throw DomainError("steering_vector: delay outside [0, T)");
    }
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> s(K);
    const Real w = Real(-2) * std::numbers::pi_v<Real> * tau / T;
    for (int k = 0; k < K; ++k) {
        s(k) = std::polar(Real(1), w * Real(k));
    }
    return s;
}

/// K x L matrix whose columns are steering vectors of `delays`.
MatrixXcd steering_matrix(const std::vector<double>& delays, int K, double T);

/// Exact normalised steering correlation (1/K) s^H(tau_a) s(tau_b) as a
/// function of dtau = tau_a - tau_b.
template <class Real>
std::complex<Real> dirichlet(Real dtau, int K, Real T)
{
    const Real pi = std::numbers::pi_v<Real>;
    const Real x = pi * dtau / T;
    const Real den = Real(K) * std::sin(x);
    const std::complex<Real> phase = std::polar(Real(1), Real(K - 1) * x);
    if (std::abs(den) < Real(64) * std::numeric_limits<Real>::epsilon()) {
        // dtau is a multiple of T: every term of the sum equals exp(j 2 pi k n) = 1
        return {Real(1), Real(0)};
    }
    return phase * (std::sin(Real(K) * x) / den);
}

/// Fourier synthesis: out(r, k) = sum_l amps(r, l) exp(-j 2 pi k tau_l / T).
MatrixXcd synthesize_cfr(const MatrixXcd& amps, const std::vector<double>& delays, int K, double T);

}  // namespace pmimo
