#include "pmimo/precoding.hpp"

#include "pmimo/linalg.hpp"

#include <cassert>

namespace pmimo {

MatrixXcd eigenbeams(const MatrixXcd& R, int D)
{
    if (D < 1 || D > R.rows()) {
        throw std::invalid_argument("eigenbeams: D must satisfy 1 <= D <= M");
    }
    return hermitian_eigen(R).vectors.leftCols(D);
}

EffectiveChannel effective_channel(const MatrixXcd& U_s, const ChannelRealization& realization,
                                   const MultipathProfile& profile, const SystemParams& params)
{
    if (U_s.rows() != realization.alpha.rows() || realization.alpha.cols() != profile.paths()) {
        throw std::invalid_argument("effective_channel: dimension mismatch");
    }
    EffectiveChannel eff;
    eff.U_s = U_s;
    eff.beta = U_s.adjoint() * realization.alpha;
    eff.b = U_s.adjoint() * realization.cfr;
#ifndef NDEBUG
    const MatrixXcd fourier = synthesize_cfr(eff.beta, profile.delays, params.K, params.symbol_duration());
    assert((fourier - eff.b).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, eff.b.cwiseAbs().maxCoeff()));
#else
    (void)params;
#endif
    return eff;
}

MatrixXcd TrainingBlock::symbols() const
{
    return phases.unaryExpr([](double p) { return std::polar(1.0, p); });
}

VectorXcd TrainingBlock::diagonal(int d) const
{
    return phases.row(d).transpose().unaryExpr([](double p) { return std::polar(1.0, p); });
}

TrainingBlock training(int D, int K, Stream& rng)
{
    if (D < 1 || K < 1) {
        throw std::invalid_argument("training: D and K must be positive");
    }
    TrainingBlock t;
    t.phases.resize(D, K);
    // Row-major fill so the draw order does not depend on storage order.
    for (int d = 0; d < D; ++d) {
        for (int k = 0; k < K; ++k) {
            t.phases(d, k) = rng.uniform(-kPi, kPi);
        }
    }
    return t;
}

VectorXcd transmit(const TrainingBlock& pilots, const EffectiveChannel& eff, double N0, Stream& rng)
{
    if (pilots.beams() != eff.b.rows() || pilots.subcarriers() != eff.b.cols()) {
        throw std::invalid_argument("transmit: training and channel dimensions differ");
    }
    if (!(N0 >= 0.0)) {
        throw std::invalid_argument("transmit: N0 must be nonnegative");
    }
    VectorXcd y = pilots.symbols().cwiseProduct(eff.b).colwise().sum().transpose();
    if (N0 > 0.0) {
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            y(k) += rng.complex_normal(N0);
        }
    }
    return y;
}

}  // namespace pmimo
