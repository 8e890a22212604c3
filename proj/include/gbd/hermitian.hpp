#ifndef GBD_HERMITIAN_HPP
#define GBD_HERMITIAN_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gbd {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Largest absolute entry of A - A^H.
template <typename Derived>
typename Derived::RealScalar hermitian_deviation(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("hermitian_deviation: matrix is not square");
  }
  if (a.size() == 0) return 0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// (A + A^H) / 2 without any checks.
template <typename Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  M out = (a + a.adjoint()) / typename Derived::RealScalar(2);
  return out;
}

/// Symmetrizes A, rejecting inputs whose deviation from Hermitian exceeds tol.
template <typename Real>
CMatrix<Real> make_hermitian(const CMatrix<Real>& a, Real tol = Real(1e-8)) {
  const Real dev = hermitian_deviation(a);
  if (!(dev <= tol)) {
    throw std::invalid_argument("make_hermitian: deviation " + std::to_string(double(dev)) +
                                " exceeds tolerance");
  }
  return hermitian_part(a);
}

/// Eigenvalues in ascending order with a unitary eigenvector matrix.
template <typename Real>
struct EigenDecomposition {
  RVector<Real> eigenvalues;
  CMatrix<Real> eigenvectors;

  explicit EigenDecomposition(const CMatrix<Real>& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> solver(hermitian_part(a));
    if (solver.info() != Eigen::Success) {
      throw std::domain_error("EigenDecomposition: eigensolver did not converge");
    }
    eigenvalues = solver.eigenvalues();
    eigenvectors = solver.eigenvectors();
  }

  CMatrix<Real> reconstruct() const { return reconstruct(eigenvalues); }

  /// V diag(values) V^H with the stored eigenvectors.
  CMatrix<Real> reconstruct(const RVector<Real>& values) const {
    CMatrix<Real> out =
        eigenvectors * values.template cast<Complex<Real>>().asDiagonal() * eigenvectors.adjoint();
    return hermitian_part(out);
  }

  Real min_eigenvalue() const { return eigenvalues.size() ? eigenvalues(0) : Real(0); }
};

/// Returns V f(Λ) V^H for a Hermitian A.
template <typename Real, typename F>
CMatrix<Real> apply_spectral(const CMatrix<Real>& a, F&& f) {
  EigenDecomposition<Real> eig(a);
  RVector<Real> mapped = eig.eigenvalues.unaryExpr(std::forward<F>(f));
  return eig.reconstruct(mapped);
}

/// Natural-log determinant of a Hermitian positive definite matrix via Cholesky.
template <typename Real>
Real logdet(const CMatrix<Real>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("logdet: matrix is not square");
  Eigen::LLT<CMatrix<Real>> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("logdet: matrix is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal().real();
  if ((diag.array() <= Real(0)).any() || !diag.allFinite()) {
    throw std::domain_error("logdet: matrix is not positive definite");
  }
  return Real(2) * diag.array().log().sum();
}

/// A^{-1} B for Hermitian positive definite A.
template <typename Real>
CMatrix<Real> solve_pd(const CMatrix<Real>& a, const CMatrix<Real>& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("solve_pd: dimension mismatch");
  }
  Eigen::LLT<CMatrix<Real>> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("solve_pd: matrix is not positive definite");
  }
  return llt.solve(b);
}

template <typename Real>
CMatrix<Real> inverse_pd(const CMatrix<Real>& a) {
  return hermitian_part(solve_pd<Real>(a, CMatrix<Real>::Identity(a.rows(), a.rows())));
}

/// Sum of squared moduli of the entries.
template <typename Derived>
typename Derived::RealScalar frob_sq(const Eigen::MatrixBase<Derived>& a) {
  return a.squaredNorm();
}

/// Real part of tr(A^H B), the inner product on complex matrices.
template <typename DA, typename DB>
typename DA::RealScalar real_inner(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

/// Euclidean projection of v onto {x >= 0, sum(x) <= budget}.
///
/// Clips negatives; when the clipped mass exceeds the budget, the common
/// shift theta is found by scanning the sorted breakpoints.
template <typename Real>
std::vector<Real> project_capped_simplex(std::span<const Real> v, Real budget) {
  std::vector<Real> out(v.size());
  Real clipped_sum = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(v[i], Real(0));
    clipped_sum += out[i];
  }
  if (clipped_sum <= budget) return out;

  std::vector<Real> sorted(out);
  std::sort(sorted.begin(), sorted.end(), std::greater<Real>());
  Real prefix = 0;
  Real theta = 0;
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    prefix += sorted[r];
    const Real candidate = (prefix - budget) / Real(r + 1);
    if (sorted[r] > candidate) theta = candidate;
    else break;
  }
  for (auto& x : out) x = std::max(x - theta, Real(0));
  return out;
}

/// Frobenius-norm projection of a tuple of Hermitian matrices onto
/// {X_i >= 0, sum_i tr(X_i) <= power}.
template <typename Real>
std::vector<CMatrix<Real>> project_cell(std::span<const CMatrix<Real>> xs, Real power) {
  if (!(power > Real(0))) throw std::invalid_argument("project_cell: power must be positive");
  std::vector<EigenDecomposition<Real>> eigs;
  eigs.reserve(xs.size());
  std::vector<Real> all;
  for (const auto& x : xs) {
    if (x.rows() != x.cols()) throw std::invalid_argument("project_cell: matrix is not square");
    eigs.emplace_back(x);
    for (Eigen::Index j = 0; j < eigs.back().eigenvalues.size(); ++j) {
      all.push_back(eigs.back().eigenvalues(j));
    }
  }
  const std::vector<Real> projected = project_capped_simplex<Real>(all, power);

  std::vector<CMatrix<Real>> out;
  out.reserve(xs.size());
  std::size_t offset = 0;
  for (const auto& eig : eigs) {
    const Eigen::Index n = eig.eigenvalues.size();
    RVector<Real> values(n);
    for (Eigen::Index j = 0; j < n; ++j) values(j) = projected[offset + std::size_t(j)];
    offset += std::size_t(n);
    out.push_back(eig.reconstruct(values));
  }
  return out;
}

/// Projection onto {Y Hermitian : Y >= floor I}.
template <typename Real>
CMatrix<Real> project_eigen_floor(const CMatrix<Real>& y, Real floor) {
  return apply_spectral<Real>(y, [floor](Real v) { return std::max(v, floor); });
}

}  // namespace gbd

#endif  // GBD_HERMITIAN_HPP
