#include "pmimo/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pmimo;

namespace {

ExperimentConfig tiny()
{
    ExperimentConfig c;
    c.params.K = 32;
    c.params.M = 8;
    c.params.D = 2;
    c.params.L = 2;
    c.n_profiles = 2;
    c.n_realizations = 5;
    c.seed = 99;
    c.sweep_axis = SweepAxis::bits;
    c.sweep_values = {4, 8};
    c.sigma2_db = -40.0;
    return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("CSV header and layout")
{
    const MseReport r = sweep(tiny(), 1);
    const std::string csv = csv_text(r);
    CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(std::string(kCsvHeader) ==
          "sweep_axis,sweep_value,mse_empirical,mse_se,mse_exact,mse_approx,mse_worst,mmse_theory,mmse_empirical,"
          "capacity,capacity_se,trials,seed");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("\nbits,4,") != std::string::npos);
    CHECK(csv.find(",10,99\n") != std::string::npos);
}

TEST_CASE("identical runs give identical bytes")
{
    ExperimentConfig c = tiny();
    c.n_profiles = 1;
    c.n_realizations = 1;
    CHECK(csv_text(sweep(c, 1)) == csv_text(sweep(c, 1)));
    c.n_profiles = 3;
    c.n_realizations = 7;
    CHECK(csv_text(sweep(c, 1)) == csv_text(sweep(c, 3)));
}

TEST_CASE("different seeds differ")
{
    ExperimentConfig c = tiny();
    const std::string a = csv_text(sweep(c, 1));
    c.seed = 100;
    CHECK(a != csv_text(sweep(c, 1)));
}

TEST_CASE("noiseless, finely quantized pipeline is exact")
{
    ExperimentConfig c = tiny();
    c.set_snr_db(120.0);
    c.sigma2_db = -std::numeric_limits<double>::infinity();
    const PointResult r = run_point(c, 16, 1);
    REQUIRE(r.error.empty());
    CHECK(r.mse_empirical < 1e-6);
    CHECK(r.capacity == doctest::Approx(r.capacity_ideal).epsilon(1e-6));
}

TEST_CASE("MMSE does not lose to LS")
{
    ExperimentConfig c = tiny();
    c.n_realizations = 100;
    for (double v : {4.0, 8.0}) {
        const PointResult r = run_point(c, v, 1);
        CHECK(r.mmse_empirical <= r.mse_empirical + std::hypot(r.mse_se, r.mmse_se));
        CHECK(r.mse_worst >= r.mse_approx);
    }
}

TEST_CASE("ESPRIT delay source")
{
    ExperimentConfig c = tiny();
    c.delay_source = DelaySource::esprit;
    c.uplink_snr_db = 20.0;
    const PointResult r = run_point(c, 8, 1);
    REQUIRE(r.error.empty());
    CHECK(r.sigma2_delay > 0.0);
    CHECK(std::isfinite(r.mse_empirical));
}

TEST_CASE("failed point is reported and the sweep continues")
{
    ExperimentConfig c = tiny();
    c.min_gap = c.params.tau_max;
    c.max_redraws = 5;
    const MseReport r = sweep(c, 1);
    REQUIRE(r.rows.size() == 2);
    CHECK_FALSE(r.rows[0].error.empty());
    CHECK(std::isnan(r.rows[0].mse_empirical));
    CHECK(csv_text(r).find("nan") != std::string::npos);
}

TEST_CASE("empty sweep")
{
    ExperimentConfig c = tiny();
    c.sweep_values.clear();
    const MseReport r = sweep(c, 1);
    CHECK(r.rows.empty());
    CHECK(csv_text(r) == std::string(kCsvHeader) + "\n");
}

TEST_CASE("sweep axes")
{
    ExperimentConfig c = tiny();
    CHECK(apply_sweep_value(c, 7).bits == 7);
    c.sweep_axis = SweepAxis::snr;
    CHECK(apply_sweep_value(c, 20).params.N0 == doctest::Approx(0.01));
    c.sweep_axis = SweepAxis::sigma2;
    CHECK(apply_sweep_value(c, -33).sigma2_db == -33.0);
}

TEST_CASE("CSV file output")
{
    const MseReport r = sweep(tiny(), 1);
    const auto path = std::filesystem::temp_directory_path() / "pmimo_harness_test.csv";
    emit_csv(r, path);
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == csv_text(r));
    std::filesystem::remove(path);
}

TEST_CASE("pairwise summation")
{
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 0.1 * static_cast<double>(i);
    }
    CHECK(pairwise_sum(v.data(), v.size()) == doctest::Approx(0.1 * 999 * 1000 / 2));
    CHECK(pairwise_sum(v.data(), 0) == 0.0);
    std::vector<double> tiny_terms(1 << 20, 1e-16);
    tiny_terms[0] = 1.0;
    CHECK(pairwise_sum(tiny_terms.data(), tiny_terms.size()) == doctest::Approx(1.0 + 1e-16 * ((1 << 20) - 1)));
}

}
