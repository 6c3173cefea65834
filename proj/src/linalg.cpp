#include "pmimo/linalg.hpp"

#include <algorithm>
#include <limits>

namespace pmimo {

void canonical_phase(Eigen::Ref<VectorXcd> v)
{
    if (v.size() == 0) {
        return;
    }
    const double peak = v.cwiseAbs().maxCoeff();
    if (peak == 0.0) {
        return;
    }
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= peak * (1.0 - 1e-9)) {
            pivot = i;
            break;
        }
    }
    v *= std::conj(v(pivot)) / std::abs(v(pivot));
}

namespace {

// Replace the columns of `cluster` (an orthonormal basis of an eigenspace)
// by the Gram-Schmidt basis of the projected canonical vectors.
MatrixXcd canonical_basis(const MatrixXcd& cluster)
{
    const Eigen::Index n = cluster.rows();
    const Eigen::Index c = cluster.cols();
    MatrixXcd coeffs(c, c);  // basis expressed in cluster coordinates
    Eigen::Index found = 0;
    for (Eigen::Index j = 0; j < n && found < c; ++j) {
        VectorXcd w = cluster.row(j).adjoint();  // cluster^H e_j
        for (Eigen::Index i = 0; i < found; ++i) {
            w -= coeffs.col(i) * coeffs.col(i).dot(w);
        }
        const double norm = w.norm();
        if (norm > 1e-6) {
            coeffs.col(found++) = w / norm;
        }
    }
    if (found < c) {
        throw NumericError("canonical_basis: eigenspace basis is rank deficient");
    }
    return cluster * coeffs;
}

}  // namespace

HermitianEigen hermitian_eigen(const MatrixXcd& R, double cluster_tol)
{
    if (R.rows() != R.cols()) {
        throw std::invalid_argument("hermitian_eigen: matrix is not square");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(R);
    if (solver.info() != Eigen::Success) {
        throw NumericError("hermitian_eigen: eigensolver failed");
    }
    const Eigen::Index n = R.rows();
    HermitianEigen out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    if (n == 0) {
        return out;
    }

    const double scale = std::max(std::abs(out.values(0)), 1.0);
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && out.values(end - 1) - out.values(end) <= cluster_tol * scale) {
            ++end;
        }
        if (end - start > 1) {
            out.vectors.middleCols(start, end - start) = canonical_basis(out.vectors.middleCols(start, end - start));
        }
        start = end;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        canonical_phase(out.vectors.col(j));
    }
    return out;
}

VectorXd hermitian_eigenvalues(const MatrixXcd& R)
{
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(R, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("hermitian_eigenvalues: eigensolver failed");
    }
    return solver.eigenvalues().reverse();
}

int numeric_rank(const MatrixXcd& hermitian, double rel_tol)
{
    const VectorXd ev = hermitian_eigenvalues(hermitian);
    if (ev.size() == 0 || ev(0) <= 0.0) {
        return 0;
    }
    return static_cast<int>((ev.array() > rel_tol * ev(0)).count());
}

double condition_number(const MatrixXcd& A)
{
    if (A.size() == 0) {
        return 1.0;
    }
    Eigen::JacobiSVD<MatrixXcd> svd(A);
    const VectorXd& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    if (smallest <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return sv(0) / smallest;
}

double relative_frobenius(const MatrixXcd& A, const MatrixXcd& B)
{
    return (A - B).norm() / B.norm();
}

}  // namespace pmimo
