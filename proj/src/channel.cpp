#include "pmimo/channel.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace pmimo {

void SystemParams::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("SystemParams: " + what); };
    if (K < 1) fail("K must be positive");
    if (!(delta_f > 0.0)) fail("delta_f must be positive");
    if (M < 1) fail("M must be positive");
    if (D < 1 || D > M) fail("D must satisfy 1 <= D <= M");
    if (L < 1) fail("L must be at least 1");
    if (K < 2 * L) fail("K must be at least 2L");
    if (!(N0 >= 0.0)) fail("N0 must be nonnegative");
    if (!(tau_max > 0.0) || !(tau_max < symbol_duration())) fail("tau_max must lie in (0, T)");
}

void MultipathProfile::validate(double min_gap) const
{
    const std::size_t L = delays.size();
    if (L == 0 || powers.size() != L || powers_ul.size() != L || subpath_angles.size() != L) {
        throw std::invalid_argument("MultipathProfile: inconsistent path counts");
    }
    for (std::size_t l = 1; l < L; ++l) {
        if (!(delays[l] - delays[l - 1] >= min_gap) || !(delays[l] > delays[l - 1])) {
            throw std::invalid_argument("MultipathProfile: delays not sorted with the minimum gap");
        }
    }
    const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
    const double total_ul = std::accumulate(powers_ul.begin(), powers_ul.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12 || std::abs(total_ul - 1.0) > 1e-12) {
        throw std::invalid_argument("MultipathProfile: powers do not sum to one");
    }
    for (const auto& a : subpath_angles) {
        if (a.empty()) {
            throw std::invalid_argument("MultipathProfile: path without subpaths");
        }
    }
}

double default_min_gap(const SystemParams& params)
{
    return params.symbol_duration() / params.K;
}

namespace {

std::vector<double> exponential_pdp(const std::vector<double>& delays, double decay)
{
    std::vector<double> p(delays.size());
    // Relative to the first delay so the exponentials never underflow.
    for (std::size_t l = 0; l < delays.size(); ++l) {
        p[l] = std::exp(-(delays[l] - delays.front()) / decay);
    }
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) {
        v /= total;
    }
    return p;
}

}  // namespace

MultipathProfile make_profile(const SystemParams& params, double decay, int n_subpaths, Stream& rng,
                              const ProfileOptions& options)
{
    if (!(decay > 0.0)) {
        throw std::invalid_argument("make_profile: decay must be positive");
    }
    if (n_subpaths < 1) {
        throw std::invalid_argument("make_profile: need at least one subpath");
    }
    const double min_gap = std::isnan(options.min_gap) ? default_min_gap(params) : options.min_gap;
    const int L = params.L;

    MultipathProfile profile;
    bool accepted = false;
    for (int attempt = 0; attempt <= options.max_redraws && !accepted; ++attempt) {
        profile.delays.resize(L);
        for (double& t : profile.delays) {
            t = rng.uniform(0.0, params.tau_max);
        }
        std::sort(profile.delays.begin(), profile.delays.end());
        accepted = true;
        for (int l = 1; l < L; ++l) {
            if (!(profile.delays[l] - profile.delays[l - 1] >= min_gap) || profile.delays[l] == profile.delays[l - 1]) {
                accepted = false;
                break;
            }
        }
    }
    if (!accepted) {
        std::ostringstream msg;
        msg << "make_profile: no delay set with gap >= " << min_gap << " s after " << options.max_redraws
            << " redraws";
        throw GenerationError(msg.str());
    }

    profile.powers = exponential_pdp(profile.delays, decay);
    profile.powers_ul = options.uplink_decay ? exponential_pdp(profile.delays, *options.uplink_decay) : profile.powers;

    profile.subpath_angles.resize(L);
    for (int l = 0; l < L; ++l) {
        const double centre = rng.uniform(-kPi, kPi);
        const double spread = rng.uniform(0.0, kPi / 2.0);
        auto& angles = profile.subpath_angles[l];
        angles.resize(n_subpaths);
        for (double& a : angles) {
            a = spread > 0.0 ? rng.uniform(centre - spread / 2.0, centre + spread / 2.0) : centre;
        }
    }
    return profile;
}

VectorXcd array_response(double theta, int M)
{
    VectorXcd v(M);
    const double w = -kPi * std::sin(theta);
    for (int m = 0; m < M; ++m) {
        v(m) = std::polar(1.0, w * m);
    }
    return v;
}

SpatialCovariance spatial_covariance(const MultipathProfile& profile, int M)
{
    SpatialCovariance cov;
    cov.total = MatrixXcd::Zero(M, M);
    for (int l = 0; l < profile.paths(); ++l) {
        const auto& angles = profile.subpath_angles[l];
        MatrixXcd V(M, static_cast<Eigen::Index>(angles.size()));
        for (std::size_t i = 0; i < angles.size(); ++i) {
            V.col(static_cast<Eigen::Index>(i)) = array_response(angles[i], M);
        }
        MatrixXcd R = (profile.powers[l] / static_cast<double>(angles.size())) * (V * V.adjoint());
        cov.total += R;
        cov.per_path.push_back(std::move(R));
    }
    return cov;
}

MatrixXcd steering_matrix(const std::vector<double>& delays, int K, double T)
{
    MatrixXcd S(K, static_cast<Eigen::Index>(delays.size()));
    for (std::size_t l = 0; l < delays.size(); ++l) {
        S.col(static_cast<Eigen::Index>(l)) = steering_vector(delays[l], K, T);
    }
    return S;
}

MatrixXcd synthesize_cfr(const MatrixXcd& amps, const std::vector<double>& delays, int K, double T)
{
    if (amps.cols() != static_cast<Eigen::Index>(delays.size())) {
        throw std::invalid_argument("synthesize_cfr: amplitude columns do not match delay count");
    }
    if (delays.empty()) {
        return MatrixXcd::Zero(amps.rows(), K);
    }
    return amps * steering_matrix(delays, K, T).transpose();
}

ChannelRealization realize(const MultipathProfile& profile, const SystemParams& params, Stream& rng)
{
    const int M = params.M;
    const int L = profile.paths();
    ChannelRealization ch;
    ch.alpha = MatrixXcd::Zero(M, L);
    ch.alpha_ul = MatrixXcd::Zero(M, L);
    for (int l = 0; l < L; ++l) {
        const auto& angles = profile.subpath_angles[l];
        const double n = static_cast<double>(angles.size());
        for (double theta : angles) {
            const VectorXcd a = array_response(theta, M);
            const cplx g = rng.complex_normal(profile.powers[l] / n);
            const cplx g_ul = rng.complex_normal(profile.powers_ul[l] / n);
            ch.alpha.col(l) += g * a;
            ch.alpha_ul.col(l) += g_ul * a;
        }
    }
    const double T = params.symbol_duration();
    ch.cfr = synthesize_cfr(ch.alpha, profile.delays, params.K, T);
    ch.cfr_ul = synthesize_cfr(ch.alpha_ul, profile.delays, params.K, T);
    return ch;
}

}  // namespace pmimo
