#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmimo {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Random generation gave up (e.g. rejection sampling ran out of redraws).
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigensolver or factorization failure.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares system too ill-conditioned to solve.
class SingularSystemError : public NumericError {
public:
    using NumericError::NumericError;
};

/// OFDM / array dimensions shared by every stage of the pipeline.
///
/// The symbol duration is always derived from the subcarrier spacing so the
/// two can never disagree.
struct SystemParams {
    int K = 256;             // subcarriers
    double delta_f = 15e3;   // subcarrier spacing [Hz]
    int M = 64;              // BS antennas
    int D = 6;               // effective channel dimension
    int L = 6;               // paths
    double N0 = 0.1;         // noise variance
    double tau_max = 5e-6;   // maximum delay [s]

    double symbol_duration() const { return 1.0 / delta_f; }

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    bool operator==(const SystemParams&) const = default;
};

}  // namespace pmimo
