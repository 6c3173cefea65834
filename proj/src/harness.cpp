#include "pmimo/harness.hpp"

#include "pmimo/amp_est.hpp"
#include "pmimo/analysis.hpp"
#include "pmimo/delay_est.hpp"
#include "pmimo/precoding.hpp"
#include "pmimo/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace pmimo {

double pairwise_sum(const double* data, std::size_t n)
{
    if (n <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += data[i];
        }
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream namespaces under the experiment seed.
constexpr std::uint64_t kProfileStream = 0;
constexpr std::uint64_t kTrialStream = 1;

struct MeanSe {
    double mean = kNaN;
    double se = kNaN;
};

MeanSe mean_se(const std::vector<double>& v)
{
    const std::size_t n = v.size();
    if (n == 0) {
        return {};
    }
    MeanSe out;
    out.mean = pairwise_sum(v.data(), n) / static_cast<double>(n);
    if (n < 2) {
        out.se = 0.0;
        return out;
    }
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) {
        dev[i] = (v[i] - out.mean) * (v[i] - out.mean);
    }
    const double var = pairwise_sum(dev.data(), n) / static_cast<double>(n - 1);
    out.se = std::sqrt(var / static_cast<double>(n));
    return out;
}

/// Run body(i) for i in [0, n) on `threads` workers. The first exception by
/// index is rethrown so failures are reported deterministically.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body)
{
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            run(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    run(i);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

/// Per-profile quantities shared by all realizations of a point.
struct ProfileState {
    MultipathProfile profile;
    SpatialCovariance spatial;
    MatrixXcd U_s;
    EffectiveCovariance cov;
    TheoryInputs theory;
    double mmse_theory = kNaN;
};

struct TrialOutcome {
    double ls_mse = kNaN;
    double exact_mse = kNaN;
    double mmse_mse = kNaN;
    double capacity = kNaN;
    double capacity_ideal = kNaN;
    double delay_sq_error = kNaN;
    bool unreliable = false;
};

double point_sigma2(const ExperimentConfig& c)
{
    return sigma2_from_db(c.sigma2_db, c.params.tau_max);
}

ProfileState build_profile(const ExperimentConfig& c, int index)
{
    const SystemParams& p = c.params;
    Stream rng = derive_stream(c.seed, {kProfileStream, static_cast<std::uint64_t>(index)});
    ProfileOptions opts;
    if (c.min_gap) {
        opts.min_gap = *c.min_gap;
    }
    opts.max_redraws = c.max_redraws;
    opts.uplink_decay = c.uplink_pdp_decay;

    ProfileState st;
    st.profile = make_profile(p, c.pdp_decay, c.n_subpaths, rng, opts);
    st.spatial = spatial_covariance(st.profile, p.M);
    st.U_s = eigenbeams(st.spatial, p.D);
    st.cov = effective_covariance(st.U_s, st.spatial, st.profile.delays, p);
    st.theory = theory_inputs(st.U_s, st.spatial, p, c.bits, point_sigma2(c));
    if (p.N0 > 0.0) {
        const VectorXd ev = st.cov.rb_eigenvalues();
        const Eigen::Index n = std::min<Eigen::Index>(ev.size(), static_cast<Eigen::Index>(p.D) * p.L);
        st.mmse_theory = mmse_theoretical(std::span<const double>(ev.data(), static_cast<std::size_t>(n)), p.N0);
    }
    return st;
}

TrialOutcome run_trial(const ExperimentConfig& c, const ProfileState& st, int profile_index, int realization)
{
    const SystemParams& p = c.params;
    const double T = p.symbol_duration();
    Stream rng = derive_stream(c.seed, {kTrialStream, static_cast<std::uint64_t>(profile_index),
                                        static_cast<std::uint64_t>(realization)});

    // Fixed draw order: channel, pilots, noise, delay estimate.
    ChannelRealization ch = realize(st.profile, p, rng);
    const TrainingBlock pilots = training(p.D, p.K, rng);
    const EffectiveChannel eff = effective_channel(st.U_s, ch, st.profile, p);
    const VectorXcd y = transmit(pilots, eff, p.N0, rng);

    TrialOutcome out;
    std::vector<double> estimated;
    if (c.delay_source == DelaySource::synthetic) {
        estimated = synth_estimate(st.profile.delays, point_sigma2(c), p.tau_max, rng);
    } else {
        add_cfr_noise(ch.cfr_ul, c.uplink_snr_db ? noise_from_snr_db(*c.uplink_snr_db) : 0.0, rng);
        const EspritResult est = esprit(freq_covariance(ch.cfr_ul), st.profile.paths(), T);
        out.unreliable = est.unreliable;
        estimated = est.delays;
    }
    out.delay_sq_error = matched_sq_error(estimated, st.profile.delays);

    if (c.estimators.ls_parametric) {
        const DelayReport rep = report_delays(st.profile.delays, estimated, c.bits, p.tau_max, point_sigma2(c));
        const MergedDelays merged =
            merge_delays(rep.quant_delays, p.K, T, c.eta, c.merge_representative, st.profile.powers);
        const DesignMatrix X = build_design_matrix(pilots, merged.delays, p, merged.map);
        const VectorXcd beta_hat = ls_amplitudes(X, y, c.condition_cap);
        const MatrixXcd b_hat = regenerate_cfr(beta_hat, merged.delays, p.D, p.K, T);

        out.ls_mse = mse_empirical(b_hat, eff.b);
        TheoryInputs in = st.theory;
        std::vector<double> errors(st.profile.paths());
        for (int l = 0; l < st.profile.paths(); ++l) {
            errors[l] = merged.delays[merged.map[l]] - st.profile.delays[l];
        }
        in.delay_errors = std::move(errors);
        out.exact_mse = mse_exact(in);
        out.capacity = capacity(eff.b, b_hat, p.N0);
    }
    out.capacity_ideal = capacity(eff.b, eff.b, p.N0);
    if (c.estimators.mmse_genie && p.N0 > 0.0) {
        out.mmse_mse = mse_empirical(mmse_estimate(y, pilots, st.cov, p.N0), eff.b);
    }
    return out;
}

PointResult failed_point(const ExperimentConfig& c, double value, const std::string& what)
{
    PointResult r;
    r.axis = c.sweep_axis;
    r.sweep_value = value;
    r.mse_empirical = r.mse_se = r.mse_exact = r.mse_approx = r.mse_worst = kNaN;
    r.mmse_theory = r.mmse_empirical = r.mmse_se = kNaN;
    r.capacity = r.capacity_se = r.capacity_ideal = r.sigma2_delay = kNaN;
    r.trials = 0;
    r.seed = c.seed;
    r.error = what;
    return r;
}

}  // namespace

ExperimentConfig apply_sweep_value(const ExperimentConfig& config, double value)
{
    ExperimentConfig c = config;
    switch (config.sweep_axis) {
    case SweepAxis::bits:
        c.bits = static_cast<int>(std::lround(value));
        break;
    case SweepAxis::sigma2:
        c.sigma2_db = value;
        break;
    case SweepAxis::snr:
        c.set_snr_db(value);
        break;
    }
    return c;
}

PointResult run_point(const ExperimentConfig& config, double sweep_value, int threads)
{
    ExperimentConfig c = apply_sweep_value(config, sweep_value);
    try {
        validate(c);
        const int P = c.n_profiles;
        const int R = c.n_realizations;

        std::vector<ProfileState> states(P);
        parallel_for(static_cast<std::size_t>(P), threads, [&](std::size_t i) {
            states[i] = build_profile(c, static_cast<int>(i));
        });

        const std::size_t n = static_cast<std::size_t>(P) * R;
        std::vector<TrialOutcome> trials(n);
        parallel_for(n, threads, [&](std::size_t t) {
            const int pi = static_cast<int>(t / R);
            const int ri = static_cast<int>(t % R);
            trials[t] = run_trial(c, states[pi], pi, ri);
        });

        auto column = [&](double TrialOutcome::*field) {
            std::vector<double> v(n);
            for (std::size_t t = 0; t < n; ++t) {
                v[t] = trials[t].*field;
            }
            return v;
        };
        PointResult r;
        r.axis = c.sweep_axis;
        r.sweep_value = sweep_value;
        r.trials = static_cast<std::int64_t>(n);
        r.seed = c.seed;

        const MeanSe ls = mean_se(column(&TrialOutcome::ls_mse));
        const MeanSe mm = mean_se(column(&TrialOutcome::mmse_mse));
        const MeanSe cap = mean_se(column(&TrialOutcome::capacity));
        r.mse_empirical = ls.mean;
        r.mse_se = ls.se;
        r.mse_exact = mean_se(column(&TrialOutcome::exact_mse)).mean;
        r.mmse_empirical = mm.mean;
        r.mmse_se = mm.se;
        r.capacity = cap.mean;
        r.capacity_se = cap.se;
        r.capacity_ideal = mean_se(column(&TrialOutcome::capacity_ideal)).mean;
        r.sigma2_delay = mean_se(column(&TrialOutcome::delay_sq_error)).mean;
        for (const auto& t : trials) {
            r.unreliable_trials += t.unreliable ? 1 : 0;
        }

        // With ESPRIT delays the approximation uses the measured variance.
        const double sigma2 = c.delay_source == DelaySource::synthetic ? point_sigma2(c) : r.sigma2_delay;
        std::vector<double> approx(P), mmse_th(P);
        for (int i = 0; i < P; ++i) {
            TheoryInputs in = states[i].theory;
            in.sigma2 = sigma2;
            approx[i] = mse_approx(in);
            mmse_th[i] = states[i].mmse_theory;
        }
        r.mse_approx = mean_se(approx).mean;
        r.mse_worst = mse_worst_case(c.params, c.bits, sigma2);
        r.mmse_theory = mean_se(mmse_th).mean;
        if (!c.estimators.ls_parametric) {
            r.mse_approx = r.mse_worst = kNaN;
        }
        if (!c.estimators.mmse_genie) {
            r.mmse_theory = kNaN;
        }
        return r;
    } catch (const std::exception& e) {
        return failed_point(c, sweep_value, e.what());
    }
}

MseReport sweep(const ExperimentConfig& config, int threads)
{
    const auto start = std::chrono::steady_clock::now();
    MseReport report;
    report.config_hash = config_hash(config);
    report.seed = config.seed;
    report.n_profiles = config.n_profiles;
    report.n_realizations = config.n_realizations;
    for (double v : config.sweep_values) {
        report.rows.push_back(run_point(config, v, threads));
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

std::string num(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string csv_text(const MseReport& report)
{
    std::string out = std::string(kCsvHeader) + "\n";
    for (const PointResult& r : report.rows) {
        out += to_string(r.axis) + "," + num(r.sweep_value) + "," + num(r.mse_empirical) + "," + num(r.mse_se) + "," +
               num(r.mse_exact) + "," + num(r.mse_approx) + "," + num(r.mse_worst) + "," + num(r.mmse_theory) + "," +
               num(r.mmse_empirical) + "," + num(r.capacity) + "," + num(r.capacity_se) + "," +
               std::to_string(r.trials) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

void emit_csv(const MseReport& report, const std::filesystem::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    f << csv_text(report);
    if (!f) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

}  // namespace pmimo
