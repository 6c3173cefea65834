#include "pmimo/analysis.hpp"

#include <numeric>

namespace pmimo {

TheoryInputs theory_inputs(const MatrixXcd& U_s, const SpatialCovariance& spatial, const SystemParams& params, int B,
                           double sigma2)
{
    TheoryInputs in;
    in.params = params;
    in.B = B;
    in.sigma2 = sigma2;
    for (const MatrixXcd& R : spatial.per_path) {
        in.traces.push_back((U_s.adjoint() * R * U_s).trace().real());
    }
    in.trace_total = (U_s.adjoint() * spatial.total * U_s).trace().real();
    return in;
}

double mse_empirical(const MatrixXcd& b_hat, const MatrixXcd& b)
{
    if (b_hat.rows() != b.rows() || b_hat.cols() != b.cols()) {
        throw std::invalid_argument("mse_empirical: shape mismatch");
    }
    return (b_hat - b).squaredNorm();
}

namespace {

double noise_floor(const SystemParams& p)
{
    return p.N0 * p.L * p.D;
}

double delay_sensitivity(const SystemParams& p)
{
    const double T = p.symbol_duration();
    const double K = p.K;
    return kPi * kPi * K * K * K / (3.0 * T * T);
}

double delay_error_power(const SystemParams& p, int B, double sigma2)
{
    return p.tau_max * p.tau_max / (12.0 * std::pow(4.0, B)) + sigma2;
}

}  // namespace

double mse_exact(const TheoryInputs& in)
{
    if (!in.delay_errors || in.delay_errors->size() != in.traces.size()) {
        throw std::invalid_argument("mse_exact: one delay error per path is required");
    }
    const double K = in.params.K;
    const double T = in.params.symbol_duration();
    double acc = 0.0;
    for (std::size_t l = 0; l < in.traces.size(); ++l) {
        const double s = sinc(kPi * (*in.delay_errors)[l] * K / T);
        acc += in.traces[l] * (1.0 - s * s);
    }
    return K * acc + noise_floor(in.params);
}

double mse_approx(const TheoryInputs& in)
{
    return delay_sensitivity(in.params) * in.trace_total * delay_error_power(in.params, in.B, in.sigma2) +
           noise_floor(in.params);
}

double mse_worst_case(const SystemParams& params, int B, double sigma2)
{
    return delay_sensitivity(params) * params.M * delay_error_power(params, B, sigma2) + noise_floor(params);
}

double mmse_theoretical(std::span<const double> rb_eigenvalues, double N0)
{
    if (!(N0 > 0.0)) {
        throw std::invalid_argument("mmse_theoretical: N0 must be positive");
    }
    double acc = 0.0;
    for (double lambda : rb_eigenvalues) {
        const double l = std::max(lambda, 0.0);
        acc += l / (l + N0);
    }
    return N0 * acc;
}

double capacity(const MatrixXcd& b_true, const MatrixXcd& b_est, double N0)
{
    if (b_true.rows() != b_est.rows() || b_true.cols() != b_est.cols()) {
        throw std::invalid_argument("capacity: shape mismatch");
    }
    const Eigen::Index K = b_true.cols();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
        const double norm = b_est.col(k).norm();
        double gain = 0.0;
        if (norm > 0.0) {
            // b^T v with v = conj(b_hat) / |b_hat|
            gain = std::norm(b_est.col(k).dot(b_true.col(k))) / (norm * norm);
        }
        acc += std::log2(1.0 + gain / N0);
    }
    return K > 0 ? acc / static_cast<double>(K) : 0.0;
}

double sinc_approx_error(double delay_error, int K, double T)
{
    const double x = kPi * delay_error * K / T;
    return std::abs(sinc(x) - (1.0 - x * x / 6.0));
}

}  // namespace pmimo
