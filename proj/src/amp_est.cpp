#include "pmimo/amp_est.hpp"

#include "pmimo/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <limits>
#include <numeric>

namespace pmimo {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i)
    {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

}  // namespace

MergedDelays merge_delays(const std::vector<double>& delays, int K, double T, double eta,
                          MergeRepresentative representative, const std::vector<double>& weights)
{
    if (!(eta > 0.0)) {
        throw std::invalid_argument("merge_delays: eta must be positive");
    }
    if (representative == MergeRepresentative::strongest && weights.size() != delays.size()) {
        throw std::invalid_argument("merge_delays: strongest-member merge needs one weight per delay");
    }
    const int n = static_cast<int>(delays.size());
    const double threshold = T / (eta * K);
    UnionFind uf(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(delays[i] - delays[j]) < threshold) {
                uf.unite(i, j);
            }
        }
    }

    struct Cluster {
        double sum = 0.0;
        int count = 0;
        int strongest = -1;
        double value = 0.0;
    };
    std::vector<int> roots;
    std::vector<Cluster> clusters(n);
    for (int i = 0; i < n; ++i) {
        const int r = uf.find(i);
        if (clusters[r].count == 0) {
            roots.push_back(r);
        }
        auto& c = clusters[r];
        c.sum += delays[i];
        ++c.count;
        if (representative == MergeRepresentative::strongest && (c.strongest < 0 || weights[i] > weights[c.strongest])) {
            c.strongest = i;
        }
    }
    for (int r : roots) {
        auto& c = clusters[r];
        c.value = representative == MergeRepresentative::mean ? c.sum / c.count : delays[c.strongest];
    }
    std::sort(roots.begin(), roots.end(), [&](int a, int b) { return clusters[a].value < clusters[b].value; });

    MergedDelays out;
    std::vector<int> column(n, -1);
    for (std::size_t j = 0; j < roots.size(); ++j) {
        column[roots[j]] = static_cast<int>(j);
        out.delays.push_back(clusters[roots[j]].value);
    }
    out.map.resize(n);
    for (int i = 0; i < n; ++i) {
        out.map[i] = column[uf.find(i)];
    }
    return out;
}

DesignMatrix build_design_matrix(const TrainingBlock& pilots, const std::vector<double>& delays,
                                 const SystemParams& params, std::vector<int> merged_map)
{
    const int D = pilots.beams();
    const int K = pilots.subcarriers();
    if (K != params.K) {
        throw std::invalid_argument("build_design_matrix: training length differs from K");
    }
    const int Lp = static_cast<int>(delays.size());
    const MatrixXcd S = steering_matrix(delays, K, params.symbol_duration());
    DesignMatrix dm;
    dm.X.resize(K, static_cast<Eigen::Index>(D) * Lp);
    for (int d = 0; d < D; ++d) {
        dm.X.middleCols(static_cast<Eigen::Index>(d) * Lp, Lp) = pilots.diagonal(d).asDiagonal() * S;
    }
    if (merged_map.empty()) {
        merged_map.resize(Lp);
        std::iota(merged_map.begin(), merged_map.end(), 0);
    }
    dm.merged_map = std::move(merged_map);
    dm.beams = D;
    dm.paths = Lp;
    return dm;
}

VectorXcd ls_amplitudes(const DesignMatrix& design, const VectorXcd& y, double condition_cap)
{
    const MatrixXcd& X = design.X;
    if (y.size() != X.rows()) {
        throw std::invalid_argument("ls_amplitudes: observation length differs from design rows");
    }
    if (X.cols() > X.rows()) {
        throw SingularSystemError("ls_amplitudes: more unknowns than observations");
    }
    Eigen::HouseholderQR<MatrixXcd> qr(X);
    const MatrixXcd R = qr.matrixQR().topRows(X.cols()).triangularView<Eigen::Upper>();
    // X^H X = R^H R
    const VectorXd ev = hermitian_eigenvalues(R.adjoint() * R);
    const double cond = ev(ev.size() - 1) > 0.0 ? ev(0) / ev(ev.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond <= condition_cap)) {
        throw SingularSystemError("ls_amplitudes: Gram condition number exceeds cap");
    }
    return qr.solve(y);
}

MatrixXcd regenerate_cfr(const VectorXcd& beta_hat, const std::vector<double>& delays, int D, int K, double T)
{
    const Eigen::Index Lp = static_cast<Eigen::Index>(delays.size());
    if (beta_hat.size() != D * Lp) {
        throw std::invalid_argument("regenerate_cfr: amplitude vector length is not D * L'");
    }
    // Stacked as (beta_0; ...; beta_{D-1}), i.e. a row-major D x L' matrix.
    const MatrixXcd amps = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        beta_hat.data(), D, Lp);
    return synthesize_cfr(amps, delays, K, T);
}

EffectiveCovariance effective_covariance(const MatrixXcd& U_s, const SpatialCovariance& spatial,
                                         const std::vector<double>& delays, const SystemParams& params)
{
    const int D = static_cast<int>(U_s.cols());
    const int L = static_cast<int>(spatial.per_path.size());
    if (static_cast<int>(delays.size()) != L) {
        throw std::invalid_argument("effective_covariance: delay count differs from path count");
    }
    EffectiveCovariance cov;
    cov.D = D;
    cov.L = L;
    cov.K = params.K;
    cov.T = params.symbol_duration();
    cov.delays = delays;
    cov.R_beta = MatrixXcd::Zero(static_cast<Eigen::Index>(D) * L, static_cast<Eigen::Index>(D) * L);
    for (int l = 0; l < L; ++l) {
        const MatrixXcd block = U_s.adjoint() * spatial.per_path[l] * U_s;  // D x D
        for (int d1 = 0; d1 < D; ++d1) {
            for (int d2 = 0; d2 < D; ++d2) {
                cov.R_beta(d1 * L + l, d2 * L + l) = block(d1, d2);
            }
        }
    }
    return cov;
}

MatrixXcd EffectiveCovariance::dense_Rb() const
{
    const MatrixXcd S = steering();
    const MatrixXcd IS = Eigen::kroneckerProduct(MatrixXcd::Identity(D, D), S);
    return IS * R_beta * IS.adjoint();
}

VectorXd EffectiveCovariance::rb_eigenvalues() const
{
    // Nonzero spectrum of (I kron S) R_beta (I kron S^H) equals that of
    // G^{1/2} R_beta G^{1/2} with G = I kron S^H S.
    const MatrixXcd S = steering();
    const MatrixXcd gram = S.adjoint() * S;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram);
    if (es.info() != Eigen::Success) {
        throw NumericError("rb_eigenvalues: Gram eigensolver failed");
    }
    const MatrixXcd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                           es.eigenvectors().adjoint();
    const MatrixXcd G_half = Eigen::kroneckerProduct(MatrixXcd::Identity(D, D), root);
    const MatrixXcd C = G_half * R_beta * G_half;
    return hermitian_eigenvalues(0.5 * (C + C.adjoint()));
}

MatrixXcd mmse_estimate(const VectorXcd& y, const TrainingBlock& pilots, const EffectiveCovariance& cov, double N0)
{
    if (!(N0 > 0.0)) {
        throw std::invalid_argument("mmse_estimate: N0 must be positive");
    }
    if (pilots.beams() != cov.D || pilots.subcarriers() != cov.K || y.size() != cov.K) {
        throw std::invalid_argument("mmse_estimate: dimension mismatch");
    }
    const int n = cov.D * cov.L;
    const MatrixXcd S = cov.steering();
    MatrixXcd X(cov.K, n);
    for (int d = 0; d < cov.D; ++d) {
        X.middleCols(static_cast<Eigen::Index>(d) * cov.L, cov.L) = pilots.diagonal(d).asDiagonal() * S;
    }
    // R_b A^H (A R_b A^H + N0 I)^-1 y = (I kron S) R_beta (X^H X R_beta + N0 I)^-1 X^H y
    const MatrixXcd system = X.adjoint() * X * cov.R_beta + N0 * MatrixXcd::Identity(n, n);
    const VectorXcd beta_hat = cov.R_beta * system.partialPivLu().solve(X.adjoint() * y);
    return regenerate_cfr(beta_hat, cov.delays, cov.D, cov.K, cov.T);
}

}  // namespace pmimo
