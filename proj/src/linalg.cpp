#include "iidgan/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iidgan/error.hpp"

namespace iidgan {
namespace {

// Smallest denominator allowed in the Daleckii–Krein kernel; keeps the
// gradient finite when two eigenvalues are both (numerically) zero.
constexpr double kRootFloor = 1e-12;

Matrix plain_mul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < a.cols(); ++p)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, p) * b(p, j);
  return c;
}

}  // namespace

double trace(const Matrix& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

Matrix symmetrize(const Matrix& a) {
  Matrix s = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

SymmetricEigen jacobi_eigen(const Matrix& s, double symmetry_tol) {
  if (s.rows() != s.cols()) throw ShapeError("jacobi_eigen: matrix must be square");
  require_finite(s, "jacobi_eigen");
  const std::size_t n = s.rows();
  const double scale = std::max(1.0, max_abs(s));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > symmetry_tol * scale)
        throw DomainError("jacobi_eigen: matrix is not symmetric");

  Matrix a = symmetrize(s);
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off == 0.0 || std::sqrt(off) < 1e-300) break;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag += a(i, i) * a(i, i);
    if (sweep > 0 && std::sqrt(off) <= 1e-17 * std::sqrt(diag)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymmetricEigen e;
  e.values.resize(n);
  e.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    e.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) e.vectors(r, c) = v(r, order[c]);
  }
  return e;
}

Matrix reconstruct(const SymmetricEigen& e, const std::vector<double>& diag) {
  const std::size_t n = e.values.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += e.vectors(i, k) * diag[k] * e.vectors(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  return out;
}

PsdSqrt sqrt_psd_decomposed(const Matrix& s) {
  PsdSqrt r;
  r.eigen = jacobi_eigen(s);
  const double scale = std::max(1.0, max_abs(s));
  std::vector<double> roots(r.eigen.values.size());
  for (std::size_t i = 0; i < roots.size(); ++i) {
    double& lam = r.eigen.values[i];
    if (lam < -1e-6 * scale) throw DomainError("sqrt_psd: matrix is not positive semidefinite");
    if (lam < 0.0) lam = 0.0;
    roots[i] = std::sqrt(lam);
  }
  r.root = reconstruct(r.eigen, roots);
  return r;
}

Matrix sqrt_psd(const Matrix& s) { return sqrt_psd_decomposed(s).root; }

Matrix sqrt_psd_backward(const PsdSqrt& fwd, const Matrix& grad_root) {
  const std::size_t n = fwd.eigen.values.size();
  if (grad_root.rows() != n || grad_root.cols() != n)
    throw ShapeError("sqrt_psd_backward: gradient shape mismatch");
  const Matrix& q = fwd.eigen.vectors;
  // Qᵀ G Q, scaled elementwise by the Daleckii–Krein kernel, rotated back.
  Matrix inner = plain_mul(plain_mul(q.transposed(), symmetrize(grad_root)), q);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double denom = std::sqrt(fwd.eigen.values[i]) + std::sqrt(fwd.eigen.values[j]);
      inner(i, j) /= std::max(denom, kRootFloor);
    }
  return symmetrize(plain_mul(plain_mul(q, inner), q.transposed()));
}

}  // namespace iidgan
