#pragma once

#include "pmimo/types.hpp"

namespace pmimo {

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order and a reproducible eigenvector basis:
///  - inside a cluster of (numerically) equal eigenvalues the basis is
///    rebuilt by Gram-Schmidt on the projections of e_0, e_1, ... so it does
///    not depend on the solver's internal choice;
///  - every column is rotated so its largest-magnitude entry is real
///    positive (ties go to the lowest index).
struct HermitianEigen {
    VectorXd values;
    MatrixXcd vectors;
};

HermitianEigen hermitian_eigen(const MatrixXcd& R, double cluster_tol = 1e-10);

/// Eigenvalues only, descending.
VectorXd hermitian_eigenvalues(const MatrixXcd& R);

/// Rotate v in place so its largest-magnitude entry is real positive.
void canonical_phase(Eigen::Ref<VectorXcd> v);

/// Number of eigenvalues above rel_tol * largest eigenvalue.
int numeric_rank(const MatrixXcd& hermitian, double rel_tol);

/// 2-norm condition number of a general matrix (ratio of extreme singular values).
double condition_number(const MatrixXcd& A);

/// Relative Frobenius distance ||A - B|| / ||B||.
double relative_frobenius(const MatrixXcd& A, const MatrixXcd& B);

}  // namespace pmimo
