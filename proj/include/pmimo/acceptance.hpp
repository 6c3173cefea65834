#pragma once

#include "pmimo/config.hpp"

#include <string>
#include <vector>

namespace pmimo {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    int threads = 1;
    std::uint64_t seed = 20240601;
};

/// Reference system: K = 256, 15 kHz, M = 64,
/// D = L = 6, tau_max = 5 us, 20 subpaths per path, SNR 10 dB.
ExperimentConfig reference_config();

/// Desk-speed variant: K = 64, M = 32, D = L = 4, otherwise as reference_config().
ExperimentConfig scaled_config();

inline constexpr int kCriterionCount = 10;

/// Run one acceptance criterion (1-based id).
CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});

/// Run all criteria in order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// "PASS [n] name: detail (t s)".
std::string format_result(const CriterionResult& r);

}  // namespace pmimo
