#pragma once

#include <vector>

#include "iidgan/matrix.hpp"

namespace iidgan {

/// S = Q diag(values) Qᵀ for symmetric S. Columns of `vectors` are the
/// eigenvectors; values ascend.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations. Throws ShapeError for non-square input and
/// DomainError if S is asymmetric beyond `symmetry_tol` (absolute, scaled
/// by max(1, max|S|)).
SymmetricEigen jacobi_eigen(const Matrix& s, double symmetry_tol = 1e-10);

/// Q diag(f(λ)) Qᵀ.
Matrix reconstruct(const SymmetricEigen& e, const std::vector<double>& diag);

/// Principal square root of a symmetric PSD matrix together with the
/// eigendecomposition it was built from (needed for the backward pass).
struct PsdSqrt {
  Matrix root;
  SymmetricEigen eigen;   // eigenvalues clamped at 0
};

/// Eigenvalues in [−1e−6, 0) are clamped to 0; anything more negative is a
/// DomainError.
PsdSqrt sqrt_psd_decomposed(const Matrix& s);
Matrix sqrt_psd(const Matrix& s);

/// Given dL/dR for R = S^{1/2}, returns dL/dS (symmetrised) using the
/// Daleckii–Krein kernel 1/(√λi + √λj), which equals the divided difference
/// (√λi − √λj)/(λi − λj) and its limit 1/(2√λ) on coincident eigenvalues.
Matrix sqrt_psd_backward(const PsdSqrt& fwd, const Matrix& grad_root);

Matrix symmetrize(const Matrix& a);
double trace(const Matrix& a);

}  // namespace iidgan
