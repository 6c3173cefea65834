#include "pmimo/delay_est.hpp"

#include "pmimo/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace pmimo {

MatrixXcd freq_covariance(const MatrixXcd& cfr_ul)
{
    if (cfr_ul.rows() < 1) {
        throw std::invalid_argument("freq_covariance: need at least one antenna");
    }
    // Rows are h_m^T, so sum_m h_m h_m^H = H^T conj(H).
    MatrixXcd R = cfr_ul.transpose() * cfr_ul.conjugate();
    R /= static_cast<double>(cfr_ul.rows());
    return R;
}

EspritResult esprit(const MatrixXcd& R_f, int L, double T, EspritVariant variant)
{
    const Eigen::Index K = R_f.rows();
    if (R_f.cols() != K || L < 1 || L >= K) {
        throw std::invalid_argument("esprit: need a square covariance and 1 <= L < K");
    }
    (void)variant;  // only least squares for now

    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(R_f);
    if (solver.info() != Eigen::Success) {
        throw NumericError("esprit: eigensolver failed");
    }
    // Ascending order: the signal subspace is the last L columns.
    const MatrixXcd Es = solver.eigenvectors().rightCols(L);
    const MatrixXcd E1 = Es.topRows(K - 1);
    const MatrixXcd E2 = Es.bottomRows(K - 1);
    const MatrixXcd Psi = E1.colPivHouseholderQr().solve(E2);

    Eigen::ComplexEigenSolver<MatrixXcd> rot(Psi, false);
    if (rot.info() != Eigen::Success) {
        throw NumericError("esprit: rotation eigensolver failed");
    }
    EspritResult out;
    out.delays.reserve(L);
    for (Eigen::Index i = 0; i < L; ++i) {
        const cplx z = rot.eigenvalues()(i);
        if (std::abs(std::abs(z) - 1.0) > 0.5) {
            out.unreliable = true;
        }
        double tau = -std::arg(z) * T / (2.0 * kPi);
        if (tau < 0.0) {
            tau += T;
        }
        if (tau >= T) {
            tau -= T;
        }
        out.delays.push_back(tau);
    }
    std::sort(out.delays.begin(), out.delays.end());
    return out;
}

std::vector<double> synth_estimate(const std::vector<double>& true_delays, double sigma2, double tau_max, Stream& rng)
{
    if (!(sigma2 >= 0.0)) {
        throw std::invalid_argument("synth_estimate: sigma2 must be nonnegative");
    }
    std::vector<double> est(true_delays.size());
    const double sd = std::sqrt(sigma2);
    for (std::size_t l = 0; l < est.size(); ++l) {
        const double e = rng.normal();
        est[l] = sigma2 > 0.0 ? std::clamp(true_delays[l] + sd * e, 0.0, tau_max) : true_delays[l];
    }
    return est;
}

double quantization_step(int B, double tau_max)
{
    return std::ldexp(tau_max, -B);
}

double dequantize(std::int64_t index, int B, double tau_max)
{
    return (static_cast<double>(index) + 0.5) * quantization_step(B, tau_max);
}

std::vector<std::int64_t> feedforward(std::span<const std::int64_t> indices)
{
    return {indices.begin(), indices.end()};
}

std::vector<double> match_to_truth(std::vector<double> est, const std::vector<double>& truth)
{
    if (est.size() != truth.size()) {
        throw std::invalid_argument("match_to_truth: estimate and truth sizes differ");
    }
    std::sort(est.begin(), est.end());
    return est;
}

double matched_sq_error(const std::vector<double>& est, const std::vector<double>& truth)
{
    const std::vector<double> matched = match_to_truth(est, truth);
    double acc = 0.0;
    for (std::size_t l = 0; l < truth.size(); ++l) {
        const double e = matched[l] - truth[l];
        acc += e * e;
    }
    return truth.empty() ? 0.0 : acc / static_cast<double>(truth.size());
}

double sigma2_from_db(double db, double tau_max)
{
    if (std::isinf(db) && db < 0.0) {
        return 0.0;
    }
    return std::pow(10.0, db / 10.0) * tau_max * tau_max / 12.0;
}

double sigma2_to_db(double sigma2, double tau_max)
{
    return 10.0 * std::log10(sigma2 / (tau_max * tau_max / 12.0));
}

DelayReport report_delays(const std::vector<double>& true_delays, const std::vector<double>& est_delays, int B,
                          double tau_max, double sigma2)
{
    DelayReport rep;
    rep.true_delays = true_delays;
    rep.est_delays = match_to_truth(est_delays, true_delays);
    rep.B = B;
    rep.sigma2_est = sigma2;
    std::vector<std::int64_t> indices;
    indices.reserve(rep.est_delays.size());
    for (double t : rep.est_delays) {
        indices.push_back(quantize(t, B, tau_max).index);
    }
    rep.quant_indices = feedforward(indices);
    for (std::int64_t idx : rep.quant_indices) {
        rep.quant_delays.push_back(dequantize(idx, B, tau_max));
    }
    return rep;
}

void add_cfr_noise(MatrixXcd& cfr, double noise_var, Stream& rng)
{
    if (noise_var <= 0.0) {
        return;
    }
    for (Eigen::Index m = 0; m < cfr.rows(); ++m) {
        for (Eigen::Index k = 0; k < cfr.cols(); ++k) {
            cfr(m, k) += rng.complex_normal(noise_var);
        }
    }
}

Sigma2Measurement measure_sigma2(const SystemParams& params, const MultipathProfile& profile, int n_trials,
                                 Stream& rng, std::optional<double> uplink_snr_db)
{
    if (n_trials < 100) {
        throw std::invalid_argument("measure_sigma2: n_trials must be at least 100");
    }
    const double T = params.symbol_duration();
    const double noise_var = uplink_snr_db ? std::pow(10.0, -*uplink_snr_db / 10.0) : 0.0;
    Sigma2Measurement out;
    double acc = 0.0;
    for (int t = 0; t < n_trials; ++t) {
        ChannelRealization ch = realize(profile, params, rng);
        add_cfr_noise(ch.cfr_ul, noise_var, rng);
        const EspritResult est = esprit(freq_covariance(ch.cfr_ul), profile.paths(), T);
        if (est.unreliable) {
            ++out.unreliable_trials;
        }
        acc += matched_sq_error(est.delays, profile.delays);
    }
    out.sigma2 = acc / n_trials;
    return out;
}

}  // namespace pmimo
