#include "pmimo/amp_est.hpp"
#include "pmimo/analysis.hpp"
#include "pmimo/channel.hpp"
#include "pmimo/linalg.hpp"
#include "pmimo/precoding.hpp"
#include "pmimo/random.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace pmimo;

namespace {

VectorXcd stack_rows(const MatrixXcd& beta)
{
    VectorXcd v(beta.size());
    for (Eigen::Index d = 0; d < beta.rows(); ++d) {
        v.segment(d * beta.cols(), beta.cols()) = beta.row(d).transpose();
    }
    return v;
}

VectorXcd noise(int n, double N0, Stream& rng)
{
    VectorXcd z(n);
    for (int i = 0; i < n; ++i) {
        z(i) = rng.complex_normal(N0);
    }
    return z;
}

// Uniform delays on a T/K grid, so steering vectors are exactly orthogonal.
std::vector<double> grid_delays(const SystemParams& p, std::initializer_list<int> bins)
{
    std::vector<double> d;
    for (int b : bins) {
        d.push_back(b * p.symbol_duration() / p.K);
    }
    return d;
}

}  // namespace

TEST_SUITE("amp_est") {

TEST_CASE("merge keeps resolvable delays")
{
    SystemParams p;
    const double T = p.symbol_duration();
    const std::vector<double> d = {0.0, T / p.K, 3.0 * T / p.K, 2e-6};
    const MergedDelays m = merge_delays(d, p.K, T, 1.0);
    CHECK(m.delays == d);
    CHECK(m.map == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("merge collapses coincident and close delays")
{
    SystemParams p;
    const double T = p.symbol_duration();
    const MergedDelays eq = merge_delays({1e-6, 2e-6, 2e-6}, p.K, T, 1.0);
    CHECK(eq.delays.size() == 2);
    CHECK(eq.map[1] == eq.map[2]);

    const MergedDelays m = merge_delays({1.00e-6, 1.01e-6, 3.00e-6}, p.K, T, 1.0);
    REQUIRE(m.delays.size() == 2);
    CHECK(m.delays[0] == doctest::Approx(1.005e-6).epsilon(1e-12));
    CHECK(m.delays[1] == doctest::Approx(3.00e-6).epsilon(1e-12));
    CHECK(m.map == std::vector<int>{0, 0, 1});

    const MergedDelays s =
        merge_delays({1.00e-6, 1.01e-6, 3.00e-6}, p.K, T, 1.0, MergeRepresentative::strongest, {0.1, 0.5, 0.4});
    CHECK(s.delays[0] == 1.01e-6);

    // Chains merge transitively.
    const double g = 0.9 * T / p.K;
    CHECK(merge_delays({1e-6, 1e-6 + g, 1e-6 + 2 * g}, p.K, T, 1.0).delays.size() == 1);
    CHECK_THROWS(merge_delays({1e-6}, p.K, T, 0.0));
}

TEST_CASE("design matrix structure")
{
    SystemParams p = test::small_params(32, 4, 1, 2);
    Stream rng = derive_stream(31, {});
    TrainingBlock flat = training(1, p.K, rng);
    flat.phases.setZero();
    const std::vector<double> d = {0.4e-6, 2.2e-6};
    CHECK(test::max_abs(build_design_matrix(flat, d, p).X - steering_matrix(d, p.K, p.symbol_duration())) < 1e-14);

    const DesignMatrix X = build_design_matrix(training(3, p.K, rng), d, p);
    CHECK(X.X.cols() == 6);
    CHECK((X.X.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-13);
}

TEST_CASE("normalised Gram is close to identity")
{
    SystemParams p;  // K=256, D=L=6
    Stream rng = derive_stream(32, {});
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const MultipathProfile prof = make_profile(p, 1.25e-6, 1, rng);
        const DesignMatrix X = build_design_matrix(training(p.D, p.K, rng), prof.delays, p);
        MatrixXcd G = X.X.adjoint() * X.X / double(p.K);
        G.diagonal().setZero();
        worst = std::max(worst, test::max_abs(G));
    }
    CHECK(worst < 5.0 / std::sqrt(double(p.K)));
}

TEST_CASE("least squares on a consistent system")
{
    SystemParams p = test::small_params(64, 4, 3, 3);
    Stream rng = derive_stream(33, {});
    const std::vector<double> d = {0.3e-6, 1.9e-6, 4.1e-6};
    const DesignMatrix X = build_design_matrix(training(p.D, p.K, rng), d, p);
    const VectorXcd beta = noise(9, 1.0, rng);
    CHECK(test::max_abs(ls_amplitudes(X, X.X * beta) - beta) < 1e-9);
}

TEST_CASE("single-beam single-path LS is a correlation")
{
    SystemParams p = test::small_params(64, 4, 1, 1);
    Stream rng = derive_stream(34, {});
    const std::vector<double> d = {1.3e-6};
    const DesignMatrix X = build_design_matrix(training(1, p.K, rng), d, p);
    const VectorXcd y = noise(p.K, 1.0, rng);
    const cplx expected = X.X.col(0).dot(y) / double(p.K);
    CHECK(std::abs(ls_amplitudes(X, y)(0) - expected) < 1e-12);
}

TEST_CASE("LS noise gain")
{
    SystemParams p = test::small_params(256, 4, 2, 2);
    p.N0 = 0.5;
    Stream rng = derive_stream(35, {});
    const std::vector<double> d = grid_delays(p, {3, 40});
    double acc = 0.0;
    constexpr int n = 10000;
    for (int t = 0; t < n; ++t) {
        const DesignMatrix X = build_design_matrix(training(p.D, p.K, rng), d, p);
        acc += ls_amplitudes(X, noise(p.K, p.N0, rng)).squaredNorm();
    }
    CHECK(acc / n == doctest::Approx(p.N0 * p.L * p.D / p.K).epsilon(0.05));
}

TEST_CASE("LS is unbiased under true delays")
{
    SystemParams p = test::small_params(64, 4, 2, 2);
    p.N0 = 0.2;
    Stream rng = derive_stream(36, {});
    const std::vector<double> d = {0.7e-6, 3.3e-6};
    const VectorXcd beta = noise(4, 1.0, rng);
    constexpr int n = 10000;
    VectorXcd sum = VectorXcd::Zero(4);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(4);
    for (int t = 0; t < n; ++t) {
        const DesignMatrix X = build_design_matrix(training(p.D, p.K, rng), d, p);
        const VectorXcd e = ls_amplitudes(X, X.X * beta + noise(p.K, p.N0, rng)) - beta;
        sum += e;
        sq += e.cwiseAbs2();
    }
    for (int i = 0; i < 4; ++i) {
        const double se = std::sqrt(sq(i) / n / n);
        CHECK(std::abs(sum(i) / double(n)) < 3.0 * se);
    }
}

TEST_CASE("coincident columns exceed the condition cap")
{
    SystemParams p = test::small_params(64, 4, 2, 2);
    Stream rng = derive_stream(37, {});
    const DesignMatrix X = build_design_matrix(training(p.D, p.K, rng), {1e-6, 1e-6}, p);
    CHECK_THROWS_AS(ls_amplitudes(X, noise(p.K, 1.0, rng)), SingularSystemError);
    const DesignMatrix wide = build_design_matrix(training(8, 8, rng), {1e-6, 2e-6}, test::small_params(8, 8, 8, 2));
    CHECK_THROWS_AS(ls_amplitudes(wide, noise(8, 1.0, rng)), SingularSystemError);
}

TEST_CASE("CFR regeneration")
{
    SystemParams p = test::small_params(64, 4, 2, 2);
    const double T = p.symbol_duration();
    const std::vector<double> d = {0.5e-6, 2.5e-6};
    CHECK(test::max_abs(regenerate_cfr(VectorXcd::Zero(4), d, 2, p.K, T)) == 0.0);

    Stream rng = derive_stream(38, {});
    MatrixXcd beta(2, 2);
    beta << rng.complex_normal(1.0), rng.complex_normal(1.0), rng.complex_normal(1.0), rng.complex_normal(1.0);
    const MatrixXcd b = synthesize_cfr(beta, d, p.K, T);
    CHECK(test::max_abs(regenerate_cfr(stack_rows(beta), d, 2, p.K, T) - b) < 1e-13);

    // One path, delay offset delta: |b_hat - b| = |beta| |exp(-j 2 pi k delta / T) - 1|.
    const cplx amp = rng.complex_normal(1.0);
    const double delta = 7e-9;
    const MatrixXcd exact = synthesize_cfr(MatrixXcd::Constant(1, 1, amp), {1e-6}, p.K, T);
    const MatrixXcd shifted = regenerate_cfr(VectorXcd::Constant(1, amp), {1e-6 + delta}, 1, p.K, T);
    for (int k = 0; k < p.K; ++k) {
        const double expected = std::abs(amp) * std::abs(std::polar(1.0, -2.0 * kPi * k * delta / T) - 1.0);
        CHECK(std::abs(shifted(0, k) - exact(0, k)) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("quantized delays scale the amplitude by the Dirichlet kernel")
{
    SystemParams p = test::small_params(128, 4, 1, 1);
    const double T = p.symbol_duration();
    Stream rng = derive_stream(39, {});
    const TrainingBlock pilots = training(1, p.K, rng);
    const cplx beta = rng.complex_normal(1.0);
    const double tau = 2.2e-6;
    const double tau_hat = 2.26e-6;
    const VectorXcd y = build_design_matrix(pilots, {tau}, p).X * beta;
    const cplx est = ls_amplitudes(build_design_matrix(pilots, {tau_hat}, p), y)(0);
    CHECK(std::abs(est - dirichlet(tau_hat - tau, p.K, T) * beta) < 1e-12);
}

TEST_CASE("effective covariance")
{
    SystemParams p = test::small_params(16, 8, 2, 2);
    Stream rng = derive_stream(40, {});
    const MultipathProfile prof = make_profile(p, 1e-6, 6, rng);
    const SpatialCovariance spatial = spatial_covariance(prof, p.M);
    const MatrixXcd U = eigenbeams(spatial, p.D);
    const EffectiveCovariance cov = effective_covariance(U, spatial, prof.delays, p);

    double tr = 0.0;
    for (const auto& R : spatial.per_path) {
        tr += (U.adjoint() * R * U).trace().real();
    }
    CHECK(cov.R_beta.trace().real() == doctest::Approx(tr).epsilon(1e-12));

    MatrixXcd sample = MatrixXcd::Zero(4, 4);
    constexpr int n = 100000;
    for (int t = 0; t < n; ++t) {
        const VectorXcd b = stack_rows(U.adjoint() * realize(prof, p, rng).alpha);
        sample += b * b.adjoint();
    }
    CHECK(relative_frobenius(sample / double(n), cov.R_beta) < 0.03);

    SystemParams one = test::small_params(16, 8, 1, 1);
    const MultipathProfile prof1 = make_profile(one, 1e-6, 6, rng);
    const SpatialCovariance sp1 = spatial_covariance(prof1, one.M);
    const MatrixXcd u = eigenbeams(sp1, 1);
    const EffectiveCovariance c1 = effective_covariance(u, sp1, prof1.delays, one);
    CHECK(std::abs(c1.R_beta(0, 0) - (u.adjoint() * sp1.per_path[0] * u)(0, 0)) < 1e-14);
}

TEST_CASE("factored MMSE equals the dense estimator")
{
    SystemParams p = test::small_params(16, 6, 2, 2);
    p.N0 = 0.3;
    Stream rng = derive_stream(41, {});
    const MultipathProfile prof = make_profile(p, 1e-6, 6, rng);
    const SpatialCovariance spatial = spatial_covariance(prof, p.M);
    const MatrixXcd U = eigenbeams(spatial, p.D);
    const EffectiveCovariance cov = effective_covariance(U, spatial, prof.delays, p);
    const TrainingBlock pilots = training(p.D, p.K, rng);
    const VectorXcd y = noise(p.K, 1.0, rng);

    MatrixXcd A = MatrixXcd::Zero(p.K, p.D * p.K);
    for (int d = 0; d < p.D; ++d) {
        A.middleCols(d * p.K, p.K) = pilots.diagonal(d).asDiagonal();
    }
    const MatrixXcd Rb = cov.dense_Rb();
    const MatrixXcd C = A * Rb * A.adjoint() + p.N0 * MatrixXcd::Identity(p.K, p.K);
    const VectorXcd dense = Rb * A.adjoint() * C.ldlt().solve(y);
    const MatrixXcd fact = mmse_estimate(y, pilots, cov, p.N0);
    for (int d = 0; d < p.D; ++d) {
        CHECK(test::max_abs(fact.row(d).transpose() - dense.segment(d * p.K, p.K)) < 1e-8);
    }
    CHECK(test::max_abs(mmse_estimate(y, pilots, cov, 1e12)) < 1e-10);
    CHECK_THROWS(mmse_estimate(y, pilots, cov, 0.0));
}

TEST_CASE("single-beam MMSE matches its eigenvalue formula")
{
    // With one beam A^H A = I exactly, so the closed form is exact.
    SystemParams p = test::small_params(64, 16, 1, 4);
    p.N0 = 0.1;
    Stream rng = derive_stream(42, {});
    const MultipathProfile prof = make_profile(p, 1.25e-6, 20, rng);
    const SpatialCovariance spatial = spatial_covariance(prof, p.M);
    const MatrixXcd U = eigenbeams(spatial, p.D);
    const EffectiveCovariance cov = effective_covariance(U, spatial, prof.delays, p);
    const VectorXd ev = cov.rb_eigenvalues();
    const double theory = mmse_theoretical(std::span<const double>(ev.data(), p.D * p.L), p.N0);
    double acc = 0.0;
    constexpr int n = 20000;
    for (int t = 0; t < n; ++t) {
        const ChannelRealization ch = realize(prof, p, rng);
        const EffectiveChannel eff = effective_channel(U, ch, prof, p);
        const TrainingBlock pilots = training(p.D, p.K, rng);
        const VectorXcd y = transmit(pilots, eff, p.N0, rng);
        acc += mse_empirical(mmse_estimate(y, pilots, cov, p.N0), eff.b);
    }
    CHECK(acc / n == doctest::Approx(theory).epsilon(0.03));
}

TEST_CASE("R_b eigenvalues from the factored form")
{
    SystemParams p = test::small_params(16, 6, 2, 2);
    Stream rng = derive_stream(43, {});
    const MultipathProfile prof = make_profile(p, 1e-6, 6, rng);
    const SpatialCovariance spatial = spatial_covariance(prof, p.M);
    const EffectiveCovariance cov = effective_covariance(eigenbeams(spatial, p.D), spatial, prof.delays, p);
    const VectorXd dense = hermitian_eigenvalues(cov.dense_Rb());
    const VectorXd fact = cov.rb_eigenvalues();
    for (int i = 0; i < p.D * p.L; ++i) {
        CHECK(fact(i) == doctest::Approx(dense(i)).epsilon(1e-9));
    }
    CHECK(numeric_rank(cov.dense_Rb(), 1e-10) == p.D * p.L);
}

}
