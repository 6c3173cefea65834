#include "pmimo/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace pmimo {

double noise_from_snr_db(double snr_db)
{
    return std::pow(10.0, -snr_db / 10.0);
}

void ExperimentConfig::set_snr_db(double db)
{
    snr_db = db;
    params.N0 = noise_from_snr_db(db);
}

std::string to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::bits: return "bits";
    case SweepAxis::sigma2: return "sigma2";
    case SweepAxis::snr: return "snr";
    }
    return "?";
}

SweepAxis parse_sweep_axis(const std::string& s)
{
    if (s == "bits") return SweepAxis::bits;
    if (s == "sigma2") return SweepAxis::sigma2;
    if (s == "snr") return SweepAxis::snr;
    throw std::invalid_argument("unknown sweep axis '" + s + "' (expected bits, sigma2 or snr)");
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s)
{
    if (s.empty()) {
        throw std::invalid_argument("empty number");
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    return v;
}

double parse_finite(const std::string& s)
{
    const double v = parse_double(s);
    if (!std::isfinite(v)) {
        throw std::invalid_argument("value must be finite");
    }
    return v;
}

long long parse_int(const std::string& s)
{
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw std::invalid_argument("not an integer: '" + s + "'");
    }
    return v;
}

int parse_int32(const std::string& s)
{
    const long long v = parse_int(s);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("integer out of range: '" + s + "'");
    }
    return static_cast<int>(v);
}

std::optional<double> parse_optional(const std::string& s)
{
    if (s == "none") {
        return std::nullopt;
    }
    return parse_finite(s);
}

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    if (trim(s).empty()) {
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_finite(trim(item)));
    }
    return out;
}

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_optional(const std::optional<double>& v)
{
    return v ? fmt_double(*v) : "none";
}

std::string fmt_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + fmt_double(v[i]);
    }
    return out;
}

struct Field {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

// Declaration order is the canonical output order.
const std::vector<std::pair<std::string, Field>>& fields()
{
    static const std::vector<std::pair<std::string, Field>> table = {
        {"K", {[](auto& c, auto& v) { c.params.K = parse_int32(v); }, [](auto& c) { return std::to_string(c.params.K); }}},
        {"delta_f", {[](auto& c, auto& v) { c.params.delta_f = parse_finite(v); }, [](auto& c) { return fmt_double(c.params.delta_f); }}},
        {"M", {[](auto& c, auto& v) { c.params.M = parse_int32(v); }, [](auto& c) { return std::to_string(c.params.M); }}},
        {"D", {[](auto& c, auto& v) { c.params.D = parse_int32(v); }, [](auto& c) { return std::to_string(c.params.D); }}},
        {"L", {[](auto& c, auto& v) { c.params.L = parse_int32(v); }, [](auto& c) { return std::to_string(c.params.L); }}},
        {"tau_max", {[](auto& c, auto& v) { c.params.tau_max = parse_finite(v); }, [](auto& c) { return fmt_double(c.params.tau_max); }}},
        {"snr_db", {[](auto& c, auto& v) { c.set_snr_db(parse_finite(v)); }, [](auto& c) { return fmt_double(c.snr_db); }}},
        {"n_subpaths", {[](auto& c, auto& v) { c.n_subpaths = parse_int32(v); }, [](auto& c) { return std::to_string(c.n_subpaths); }}},
        {"pdp_decay", {[](auto& c, auto& v) { c.pdp_decay = parse_finite(v); }, [](auto& c) { return fmt_double(c.pdp_decay); }}},
        {"uplink_pdp_decay", {[](auto& c, auto& v) { c.uplink_pdp_decay = parse_optional(v); }, [](auto& c) { return fmt_optional(c.uplink_pdp_decay); }}},
        {"n_profiles", {[](auto& c, auto& v) { c.n_profiles = parse_int32(v); }, [](auto& c) { return std::to_string(c.n_profiles); }}},
        {"n_realizations", {[](auto& c, auto& v) { c.n_realizations = parse_int32(v); }, [](auto& c) { return std::to_string(c.n_realizations); }}},
        {"sweep", {[](auto& c, auto& v) { c.sweep_axis = parse_sweep_axis(v); }, [](auto& c) { return to_string(c.sweep_axis); }}},
        {"values", {[](auto& c, auto& v) { c.sweep_values = parse_list(v); }, [](auto& c) { return fmt_list(c.sweep_values); }}},
        {"bits", {[](auto& c, auto& v) { c.bits = parse_int32(v); }, [](auto& c) { return std::to_string(c.bits); }}},
        {"sigma2_db",
         {[](auto& c, auto& v) {
              const double d = parse_double(v);
              if (std::isnan(d) || d == std::numeric_limits<double>::infinity()) {
                  throw std::invalid_argument("sigma2_db must be finite or -inf");
              }
              c.sigma2_db = d;
          },
          [](auto& c) { return fmt_double(c.sigma2_db); }}},
        {"delay_source",
         {[](auto& c, auto& v) {
              if (v == "esprit") c.delay_source = DelaySource::esprit;
              else if (v == "synthetic") c.delay_source = DelaySource::synthetic;
              else throw std::invalid_argument("expected esprit or synthetic");
          },
          [](auto& c) { return std::string(c.delay_source == DelaySource::esprit ? "esprit" : "synthetic"); }}},
        {"estimators",
         {[](auto& c, auto& v) {
              Estimators e{false, false};
              std::stringstream ss(v);
              std::string item;
              while (std::getline(ss, item, ',')) {
                  item = trim(item);
                  if (item == "ls_parametric") e.ls_parametric = true;
                  else if (item == "mmse_genie") e.mmse_genie = true;
                  else throw std::invalid_argument("unknown estimator '" + item + "'");
              }
              c.estimators = e;
          },
          [](auto& c) {
              std::string s;
              if (c.estimators.ls_parametric) s += "ls_parametric";
              if (c.estimators.mmse_genie) s += std::string(s.empty() ? "" : ",") + "mmse_genie";
              return s;
          }}},
        {"seed",
         {[](auto& c, auto& v) {
              errno = 0;
              char* end = nullptr;
              const unsigned long long s = std::strtoull(v.c_str(), &end, 10);
              if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE) {
                  throw std::invalid_argument("seed must be an unsigned 64-bit integer");
              }
              c.seed = s;
          },
          [](auto& c) { return std::to_string(c.seed); }}},
        {"eta", {[](auto& c, auto& v) { c.eta = parse_finite(v); }, [](auto& c) { return fmt_double(c.eta); }}},
        {"min_gap", {[](auto& c, auto& v) { c.min_gap = parse_optional(v); }, [](auto& c) { return fmt_optional(c.min_gap); }}},
        {"condition_cap", {[](auto& c, auto& v) { c.condition_cap = parse_finite(v); }, [](auto& c) { return fmt_double(c.condition_cap); }}},
        {"uplink_snr_db", {[](auto& c, auto& v) { c.uplink_snr_db = parse_optional(v); }, [](auto& c) { return fmt_optional(c.uplink_snr_db); }}},
        {"max_redraws", {[](auto& c, auto& v) { c.max_redraws = parse_int32(v); }, [](auto& c) { return std::to_string(c.max_redraws); }}},
        {"merge_representative",
         {[](auto& c, auto& v) {
              if (v == "mean") c.merge_representative = MergeRepresentative::mean;
              else if (v == "strongest") c.merge_representative = MergeRepresentative::strongest;
              else throw std::invalid_argument("expected mean or strongest");
          },
          [](auto& c) { return std::string(c.merge_representative == MergeRepresentative::mean ? "mean" : "strongest"); }}},
    };
    return table;
}

}  // namespace

void validate(const ExperimentConfig& c)
{
    std::vector<std::string> bad;
    std::string msg;
    auto check = [&](bool ok, const std::string& key, const std::string& why) {
        if (!ok) {
            bad.push_back(key);
            msg += "\n  " + key + ": " + why;
        }
    };
    const auto& p = c.params;
    check(p.K >= 1, "K", "must be positive");
    check(p.delta_f > 0.0, "delta_f", "must be positive");
    check(p.M >= 1, "M", "must be positive");
    check(p.D >= 1 && p.D <= p.M, "D", "must satisfy 1 <= D <= M");
    check(p.L >= 1 && p.K >= 2 * p.L, "L", "must satisfy L >= 1 and K >= 2L");
    check(p.tau_max > 0.0 && p.tau_max < p.symbol_duration(), "tau_max", "must lie in (0, 1/delta_f)");
    check(c.n_subpaths >= 1, "n_subpaths", "must be at least 1");
    check(c.pdp_decay > 0.0, "pdp_decay", "must be positive");
    check(!c.uplink_pdp_decay || *c.uplink_pdp_decay > 0.0, "uplink_pdp_decay", "must be positive");
    check(c.n_profiles >= 1, "n_profiles", "must be at least 1");
    check(c.n_realizations >= 1, "n_realizations", "must be at least 1");
    check(c.bits >= 1 && c.bits <= 52, "bits", "must lie in [1, 52]");
    if (c.sweep_axis == SweepAxis::bits) {
        bool ok = true;
        for (double v : c.sweep_values) {
            ok = ok && v >= 1.0 && v <= 52.0 && v == std::floor(v);
        }
        check(ok, "values", "bit counts must be integers in [1, 52]");
    }
    check(c.estimators.ls_parametric || c.estimators.mmse_genie, "estimators", "select at least one estimator");
    check(c.eta > 0.0, "eta", "must be positive");
    check(!c.min_gap || *c.min_gap >= 0.0, "min_gap", "must be nonnegative");
    check(c.condition_cap >= 1.0, "condition_cap", "must be at least 1");
    check(c.max_redraws >= 0, "max_redraws", "must be nonnegative");
    if (!bad.empty()) {
        throw ConfigError("invalid configuration:" + msg, bad);
    }
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig c;
    c.set_snr_db(c.snr_db);
    std::map<std::string, const Field*> lookup;
    for (const auto& [key, field] : fields()) {
        lookup[key] = &field;
    }

    std::vector<std::string> bad;
    std::string msg;
    std::set<std::string> seen;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bad.push_back("line " + std::to_string(lineno));
            msg += "\n  line " + std::to_string(lineno) + ": expected 'key = value'";
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = lookup.find(key);
        if (it == lookup.end()) {
            bad.push_back(key);
            msg += "\n  " + key + ": unknown key";
            continue;
        }
        if (!seen.insert(key).second) {
            bad.push_back(key);
            msg += "\n  " + key + ": duplicate key";
            continue;
        }
        try {
            it->second->set(c, value);
        } catch (const std::exception& e) {
            bad.push_back(key);
            msg += "\n  " + key + ": " + e.what();
        }
    }
    if (!bad.empty()) {
        throw ConfigError("invalid configuration:" + msg, bad);
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("cannot read config file " + path.string());
    }
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what(), e.keys());
    }
}

std::string to_config_text(const ExperimentConfig& config)
{
    std::string out;
    for (const auto& [key, field] : fields()) {
        out += key + " = " + field.get(config) + "\n";
    }
    return out;
}

std::uint64_t config_hash(const ExperimentConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_config_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace pmimo
