#include "pmimo/channel.hpp"
#include "pmimo/delay_est.hpp"
#include "pmimo/linalg.hpp"
#include "pmimo/random.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>

using namespace pmimo;

namespace {

MultipathProfile fixed_profile(std::vector<double> delays, int n_subpaths, Stream& rng)
{
    MultipathProfile p;
    p.delays = std::move(delays);
    const std::size_t L = p.delays.size();
    p.powers.assign(L, 1.0 / L);
    p.powers_ul = p.powers;
    for (std::size_t l = 0; l < L; ++l) {
        std::vector<double> a(n_subpaths);
        for (double& x : a) {
            x = rng.uniform(-kPi, kPi);
        }
        p.subpath_angles.push_back(a);
    }
    return p;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_SUITE("delay_est") {

TEST_CASE("frequency covariance structure")
{
    Stream rng = derive_stream(21, {});
    MatrixXcd h(1, 8);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        h.data()[i] = rng.complex_normal(1.0);
    }
    const MatrixXcd R1 = freq_covariance(h);
    CHECK(test::max_abs(R1 - h.transpose() * h.conjugate()) < 1e-14);
    CHECK(numeric_rank(R1, 1e-10) == 1);

    SystemParams p = test::small_params(16, 4, 1, 1);
    const MultipathProfile flat = fixed_profile({0.0}, 5, rng);
    const ChannelRealization ch = realize(flat, p, rng);
    const double c = ch.alpha_ul.col(0).squaredNorm() / p.M;
    CHECK(test::max_abs(freq_covariance(ch.cfr_ul) - MatrixXcd::Constant(p.K, p.K, c)) < 1e-12);
}

TEST_CASE("noiseless covariance has rank L")
{
    SystemParams p;
    Stream rng = derive_stream(22, {});
    const MultipathProfile prof = make_profile(p, 1.25e-6, 20, rng);
    const ChannelRealization ch = realize(prof, p, rng);
    CHECK(numeric_rank(freq_covariance(ch.cfr_ul), 1e-6) == p.L);
}

TEST_CASE("ESPRIT recovers noiseless delays")
{
    SystemParams p = test::small_params(256, 64, 1, 1);
    const double T = p.symbol_duration();
    Stream rng = derive_stream(23, {});

    const MultipathProfile one = fixed_profile({1e-6}, 20, rng);
    const EspritResult e1 = esprit(freq_covariance(realize(one, p, rng).cfr_ul), 1, T);
    CHECK(std::abs(e1.delays[0] - 1e-6) < 1e-12);
    CHECK_FALSE(e1.unreliable);

    p.L = 2;
    const MultipathProfile two = fixed_profile({1e-6, 2e-6}, 20, rng);
    const EspritResult e2 = esprit(freq_covariance(realize(two, p, rng).cfr_ul), 2, T);
    CHECK(std::abs(e2.delays[0] - 1e-6) < 1e-9);
    CHECK(std::abs(e2.delays[1] - 2e-6) < 1e-9);

    p.L = 1;
    const MultipathProfile zero = fixed_profile({0.0}, 20, rng);
    const EspritResult e0 = esprit(freq_covariance(realize(zero, p, rng).cfr_ul), 1, T);
    CHECK(e0.delays[0] >= 0.0);
    CHECK(e0.delays[0] < 1e-12);
}

TEST_CASE("synthetic estimates")
{
    Stream rng = derive_stream(24, {});
    const std::vector<double> truth = {1e-6, 2.5e-6, 4e-6};
    CHECK(synth_estimate(truth, 0.0, 5e-6, rng) == truth);
    CHECK_THROWS(synth_estimate(truth, -1.0, 5e-6, rng));

    const double sigma2 = sigma2_from_db(-30.0, 5e-6);
    constexpr int n = 1000000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = synth_estimate({2.5e-6}, sigma2, 5e-6, rng)[0] - 2.5e-6;
        acc += e * e;
    }
    CHECK(acc / n == doctest::Approx(sigma2).epsilon(0.01));

    const auto clamped = synth_estimate({0.0, 5e-6}, sigma2_from_db(0.0, 5e-6), 5e-6, rng);
    CHECK(clamped[0] >= 0.0);
    CHECK(clamped[1] <= 5e-6);
}

TEST_CASE("sigma2 normalisation")
{
    CHECK(sigma2_from_db(-40.0, 5e-6) == doctest::Approx(1e-4 * 25e-12 / 12.0));
    CHECK(sigma2_to_db(sigma2_from_db(-27.5, 5e-6), 5e-6) == doctest::Approx(-27.5));
    CHECK(sigma2_from_db(-std::numeric_limits<double>::infinity(), 5e-6) == 0.0);
}

TEST_CASE("mid-rise quantizer")
{
    const double tau_max = 5e-6;
    const QuantizedDelay q = quantize(1e-6, 2, tau_max);
    CHECK(q.index == 0);
    CHECK(q.tau_hat == doctest::Approx(0.625e-6));
    CHECK(quantization_step(2, tau_max) == doctest::Approx(1.25e-6));

    Stream rng = derive_stream(25, {});
    for (int B : {1, 3, 8, 20}) {
        for (int i = 0; i < 100; ++i) {
            const QuantizedDelay a = quantize(rng.uniform(0.0, tau_max), B, tau_max);
            const QuantizedDelay b = quantize(a.tau_hat, B, tau_max);
            CHECK(a.index == b.index);
            CHECK(a.tau_hat == b.tau_hat);
            CHECK(dequantize(a.index, B, tau_max) == a.tau_hat);
        }
    }
    CHECK(quantize(tau_max, 4, tau_max).index == 15);
    CHECK(quantize(-1.0, 4, tau_max).index == 0);
    CHECK_THROWS(quantize(1e-6, 0, tau_max));
    CHECK_THROWS(quantize(1e-6, 53, tau_max));
    CHECK(quantize<float>(1e-6f, 2, 5e-6f).index == 0);
}

TEST_CASE("quantization error power")
{
    const double tau_max = 5e-6;
    Stream rng = derive_stream(26, {});
    for (int B : {2, 4, 8}) {
        constexpr int n = 1000000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = rng.uniform(0.0, tau_max);
            const double e = quantize(t, B, tau_max).tau_hat - t;
            acc += e * e;
        }
        const double delta = quantization_step(B, tau_max);
        CHECK(acc / n == doctest::Approx(delta * delta / 12.0).epsilon(0.02));
    }
}

TEST_CASE("feedforward link")
{
    const std::vector<std::int64_t> idx = {3, 7, 12};
    CHECK(feedforward(idx) == idx);
    CHECK(feedforward({}).empty());
    const DelayReport rep = report_delays({1e-6, 3e-6}, {3.01e-6, 0.99e-6}, 6, 5e-6, 0.0);
    CHECK(rep.est_delays == std::vector<double>{0.99e-6, 3.01e-6});
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(rep.quant_delays[l] == quantize(rep.est_delays[l], 6, 5e-6).tau_hat);
    }
}

TEST_CASE("measured ESPRIT variance")
{
    SystemParams p = test::small_params(64, 16, 1, 1);
    Stream rng = derive_stream(27, {});
    const MultipathProfile prof = fixed_profile({1.7e-6}, 10, rng);
    CHECK(measure_sigma2(p, prof, 100, rng).sigma2 < 1e-18);
    CHECK_THROWS(measure_sigma2(p, prof, 99, rng));

    // Single path: identical to running ESPRIT directly on the same draws.
    Stream a = derive_stream(28, {});
    Stream b = derive_stream(28, {});
    const double measured = measure_sigma2(p, prof, 100, a, 0.0).sigma2;
    double direct = 0.0;
    for (int t = 0; t < 100; ++t) {
        ChannelRealization ch = realize(prof, p, b);
        add_cfr_noise(ch.cfr_ul, 1.0, b);
        const double e = esprit(freq_covariance(ch.cfr_ul), 1, p.symbol_duration()).delays[0] - 1.7e-6;
        direct += e * e;
    }
    CHECK(measured == doctest::Approx(direct / 100));
}

TEST_CASE("more antennas do not increase the ESPRIT variance")
{
    SystemParams p = test::small_params(64, 16, 1, 3);
    Stream prof_rng = derive_stream(29, {});
    const MultipathProfile prof = fixed_profile({0.5e-6, 2.0e-6, 3.6e-6}, 20, prof_rng);
    std::vector<double> medians;
    for (int M : {16, 32, 64}) {
        p.M = M;
        std::vector<double> s;
        for (int r = 0; r < 20; ++r) {
            Stream rng = derive_stream(30, {static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(r)});
            s.push_back(measure_sigma2(p, prof, 100, rng, 5.0).sigma2);
        }
        medians.push_back(median(s));
    }
    CHECK(medians[1] <= medians[0]);
    CHECK(medians[2] <= medians[1]);
}

}
