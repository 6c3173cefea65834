// Command-line front end: simulate, verify, measure-sigma2.

#include "pmimo/acceptance.hpp"
#include "pmimo/channel.hpp"
#include "pmimo/config.hpp"
#include "pmimo/delay_est.hpp"
#include "pmimo/harness.hpp"
#include "pmimo/random.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace pmimo;

double current_value(const ExperimentConfig& c)
{
    switch (c.sweep_axis) {
    case SweepAxis::bits:
        return c.bits;
    case SweepAxis::sigma2:
        return c.sigma2_db;
    case SweepAxis::snr:
        return c.snr_db;
    }
    return c.bits;
}

int simulate(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed, int threads,
             const std::string& axis, const std::vector<double>& values)
{
    ExperimentConfig c = load_config(config_path);
    if (seed) {
        c.seed = *seed;
    }
    if (!axis.empty()) {
        c.sweep_axis = parse_sweep_axis(axis);
    }
    if (!values.empty()) {
        c.sweep_values = values;
    }
    if (c.sweep_values.empty()) {
        c.sweep_values = {current_value(c)};
    }
    validate(c);

    const MseReport report = sweep(c, threads);
    emit_csv(report, out);

    const double per_coeff = static_cast<double>(c.params.D) * c.params.K;
    std::fprintf(stderr, "config_hash=%016llx seed=%llu profiles=%d realizations=%d wall=%.2fs\n",
                 static_cast<unsigned long long>(report.config_hash), static_cast<unsigned long long>(report.seed),
                 report.n_profiles, report.n_realizations, report.wall_seconds);
    int failures = 0;
    for (const PointResult& r : report.rows) {
        if (!r.error.empty()) {
            ++failures;
            std::fprintf(stderr, "%s=%g: error: %s\n", to_string(r.axis).c_str(), r.sweep_value, r.error.c_str());
            continue;
        }
        std::fprintf(stderr, "%s=%g: mse/coeff=%.6g mmse/coeff=%.6g capacity=%.4f ideal=%.4f unreliable=%lld\n",
                     to_string(r.axis).c_str(), r.sweep_value, r.mse_empirical / per_coeff,
                     r.mmse_empirical / per_coeff, r.capacity, r.capacity_ideal,
                     static_cast<long long>(r.unreliable_trials));
    }
    return failures == 0 ? 0 : 2;
}

int verify(int threads, std::optional<std::uint64_t> seed, const std::vector<int>& ids)
{
    AcceptanceOptions opts;
    opts.threads = threads;
    if (seed) {
        opts.seed = *seed;
    }
    std::vector<int> run = ids;
    if (run.empty()) {
        for (int i = 1; i <= kCriterionCount; ++i) {
            run.push_back(i);
        }
    }
    int failed = 0;
    for (int id : run) {
        const CriterionResult r = run_criterion(id, opts);
        std::cout << format_result(r) << std::endl;
        failed += r.pass ? 0 : 1;
    }
    std::cout << (run.size() - failed) << "/" << run.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}

int measure(const std::string& config_path, std::optional<std::uint64_t> seed, int trials, int profile_index)
{
    ExperimentConfig c = load_config(config_path);
    if (seed) {
        c.seed = *seed;
    }
    ProfileOptions opts;
    if (c.min_gap) {
        opts.min_gap = *c.min_gap;
    }
    opts.max_redraws = c.max_redraws;
    opts.uplink_decay = c.uplink_pdp_decay;
    Stream prof_rng = derive_stream(c.seed, {0, static_cast<std::uint64_t>(profile_index)});
    const MultipathProfile profile = make_profile(c.params, c.pdp_decay, c.n_subpaths, prof_rng, opts);
    Stream rng = derive_stream(c.seed, {2, static_cast<std::uint64_t>(profile_index)});
    const Sigma2Measurement m = measure_sigma2(c.params, profile, trials, rng, c.uplink_snr_db);
    std::printf("sigma2=%.6e s^2 sigma2_db=%.3f unreliable=%d/%d\n", m.sigma2,
                sigma2_to_db(m.sigma2, c.params.tau_max), m.unreliable_trials, trials);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Parametric downlink channel estimation simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string axis;
    std::vector<double> values;

    auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo sweep and write CSV");
    sim->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "Output CSV path")->required();
    sim->add_option("--seed", seed, "Override the configured seed");
    sim->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sim->add_option("--sweep", axis, "Sweep axis")->check(CLI::IsMember({"bits", "sigma2", "snr"}));
    sim->add_option("--values", values, "Comma-separated sweep values")->delimiter(',');

    std::vector<int> criteria;
    auto* ver = app.add_subcommand("verify", "Run the acceptance suite");
    ver->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    ver->add_option("--seed", seed, "Seed for the acceptance experiments");
    ver->add_option("--criterion", criteria, "Run only these criteria")
        ->delimiter(',')
        ->check(CLI::Range(1, kCriterionCount));

    int trials = 100;
    int profile_index = 0;
    auto* ms = app.add_subcommand("measure-sigma2", "Print the empirical ESPRIT delay error variance");
    ms->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    ms->add_option("--seed", seed, "Override the configured seed");
    ms->add_option("--trials", trials, "Uplink realizations")->check(CLI::Range(100, 1 << 30));
    ms->add_option("--profile", profile_index, "Profile index")->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            return simulate(config_path, out, seed, threads, axis, values);
        }
        if (*ver) {
            return verify(threads, seed, criteria);
        }
        return measure(config_path, seed, trials, profile_index);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
