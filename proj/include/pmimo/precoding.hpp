#pragma once

#include "pmimo/channel.hpp"

namespace pmimo {

/// Low-dimensional channel seen through the D inner-precoder eigenbeams.
struct EffectiveChannel {
    MatrixXcd U_s;   // M x D, orthonormal columns
    MatrixXcd beta;  // D x L effective path amplitudes
    MatrixXcd b;     // D x K effective CFR
};

/// Eigenvectors of R for the D largest eigenvalues (descending), using the
/// reproducible basis convention of hermitian_eigen().
MatrixXcd eigenbeams(const MatrixXcd& R, int D);
inline MatrixXcd eigenbeams(const SpatialCovariance& cov, int D) { return eigenbeams(cov.total, D); }

/// beta = U_s^H alpha and b = U_s^H cfr. In debug builds b is cross-checked
/// against the Fourier synthesis of beta.
EffectiveChannel effective_channel(const MatrixXcd& U_s, const ChannelRealization& realization,
                                   const MultipathProfile& profile, const SystemParams& params);

/// Constant-modulus, random-phase pilots a_d[k] = exp(j phi_d[k]).
struct TrainingBlock {
    MatrixXd phases;  // D x K, in [-pi, pi)

    int beams() const { return static_cast<int>(phases.rows()); }
    int subcarriers() const { return static_cast<int>(phases.cols()); }

    /// D x K matrix of the symbols a_d[k].
    MatrixXcd symbols() const;
    /// Diagonal of A_d.
    VectorXcd diagonal(int d) const;
};

TrainingBlock training(int D, int K, Stream& rng);

/// y[k] = sum_d a_d[k] b_d[k] + z[k], z ~ CN(0, N0).
VectorXcd transmit(const TrainingBlock& pilots, const EffectiveChannel& eff, double N0, Stream& rng);

}  // namespace pmimo
