#pragma once

// Complex SVD (one-sided Jacobi), the SVD-based pseudo-inverse used as the
// reference oracle, Penrose-equation residuals, and the two linear solvers
// the closed-form formulas need.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/QR>

#include "mpx/errors.hpp"
#include "mpx/matrix.hpp"

namespace mpx {

template <typename Scalar>
struct SvdFactors {
  using Real = RealOf<Scalar>;

  MatrixX<Scalar> u;           // m x m unitary
  std::vector<Real> sigma;     // min(m, n), nonincreasing
  MatrixX<Scalar> v;           // n x n unitary
  Eigen::Index rank = 0;
  Real rank_tol = 0;

  Eigen::Index rows() const { return u.rows(); }
  Eigen::Index cols() const { return v.rows(); }
};

struct PenroseResiduals {
  double r_a = 0;  // ‖AZA − A‖ / max(1, ‖A‖)
  double r_b = 0;  // ‖ZAZ − Z‖ / max(1, ‖Z‖)
  double r_c = 0;  // ‖AZ − (AZ)*‖ / max(1, ‖AZ‖)
  double r_d = 0;  // ‖ZA − (ZA)*‖ / max(1, ‖ZA‖)

  double max() const { return std::max({r_a, r_b, r_c, r_d}); }
  bool all_within(double tol) const { return max() <= tol; }
};

template <typename Real>
Real default_rank_tol(Eigen::Index m, Eigen::Index n, Real sigma_max) {
  return Real(std::max(m, n)) * std::numeric_limits<Real>::epsilon() * sigma_max;
}

namespace detail {

// Sweep budget per column of the (tall) working matrix.
inline constexpr int kSweepsPerColumn = 30;

// One-sided Jacobi on a tall (m >= n) matrix. Returns the orthogonalized
// columns W = A V and the accumulated unitary V.
template <typename Scalar>
void jacobi_orthogonalize(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& w,
                          Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v) {
  using Real = RealOf<Scalar>;
  const Eigen::Index n = w.cols();
  const Real eps = std::numeric_limits<Real>::epsilon();
  const int budget = kSweepsPerColumn * static_cast<int>(std::max<Eigen::Index>(n, 1));

  for (int sweep = 0; sweep < budget; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Real alpha = w.col(p).squaredNorm();
        const Real beta = w.col(q).squaredNorm();
        if (alpha == Real(0) || beta == Real(0)) continue;
        const Scalar gamma = w.col(p).dot(w.col(q));  // conj(w_p) . w_q
        const Real g = std::abs(gamma);
        if (g <= eps * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;

        // Rotate phase out of gamma, then a real Jacobi rotation.
        const Scalar phase = gamma / g;
        const Real zeta = (beta - alpha) / (Real(2) * g);
        const Real t = (zeta >= 0 ? Real(1) : Real(-1)) /
                       (std::abs(zeta) + std::sqrt(Real(1) + zeta * zeta));
        const Real c = Real(1) / std::sqrt(Real(1) + t * t);
        const Real s = c * t;

        for (auto* mat : {&w, &v}) {
          auto cp = mat->col(p);
          auto cq = mat->col(q);
          for (Eigen::Index i = 0; i < mat->rows(); ++i) {
            const Scalar xp = cp(i);
            const Scalar xq = cq(i) / phase;  // e^{-i phi} w_q
            cp(i) = c * xp - s * xq;
            cq(i) = (s * xp + c * xq) * phase;
          }
        }
      }
    }
    if (!rotated) return;
  }
  std::ostringstream os;
  os << "svd: one-sided Jacobi did not converge within " << budget << " sweeps";
  throw ConvergenceError(os.str());
}

template <typename Scalar>
SvdFactors<Scalar> svd_tall(const MatrixX<Scalar>& a, std::optional<Tolerance> rank_tol_override) {
  using Real = RealOf<Scalar>;
  using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();

  ColMajor w = a;
  ColMajor v = ColMajor::Identity(n, n);
  jacobi_orthogonalize(w, v);

  std::vector<Real> norms(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = w.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return norms[static_cast<std::size_t>(i)] > norms[static_cast<std::size_t>(j)];
  });

  SvdFactors<Scalar> out;
  out.sigma.resize(static_cast<std::size_t>(n));
  out.v.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    out.sigma[static_cast<std::size_t>(j)] = norms[static_cast<std::size_t>(src)];
    out.v.col(j) = v.col(src);
  }

  const Real sigma_max = n > 0 ? out.sigma.front() : Real(0);
  out.rank_tol = rank_tol_override ? Real(rank_tol_override->value) * sigma_max
                                   : default_rank_tol(m, n, sigma_max);
  out.rank = 0;
  while (out.rank < n && out.sigma[static_cast<std::size_t>(out.rank)] > out.rank_tol) ++out.rank;

  // Left vectors for the retained singular values, completed to a unitary
  // basis by Householder QR of the retained block.
  ColMajor u_lead(m, out.rank);
  for (Eigen::Index j = 0; j < out.rank; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    u_lead.col(j) = w.col(src) / out.sigma[static_cast<std::size_t>(j)];
  }
  out.u.resize(m, m);
  out.u.leftCols(out.rank) = u_lead;
  if (out.rank < m) {
    ColMajor q = ColMajor::Identity(m, m);
    if (out.rank > 0) {
      Eigen::HouseholderQR<ColMajor> qr(u_lead);
      q = qr.householderQ() * ColMajor::Identity(m, m);
    }
    out.u.rightCols(m - out.rank) = q.rightCols(m - out.rank);
  }
  return out;
}

}  // namespace detail

/// Full SVD A = U diag(sigma) V* with square unitary U, V.
///
/// rank_tol_override is relative to sigma_max; the default cutoff is
/// max(m, n) * eps * sigma_max.
template <typename Scalar>
SvdFactors<Scalar> svd(const MatrixX<Scalar>& a,
                       std::optional<Tolerance> rank_tol_override = std::nullopt) {
  if (a.rows() >= a.cols()) return detail::svd_tall(a, rank_tol_override);
  // Wide input: factor A* and swap the roles of U and V.
  SvdFactors<Scalar> t = detail::svd_tall<Scalar>(a.adjoint(), rank_tol_override);
  std::swap(t.u, t.v);
  return t;
}

/// U diag(sigma) V*, for reconstruction checks.
template <typename Scalar>
MatrixX<Scalar> reconstruct(const SvdFactors<Scalar>& f) {
  const Eigen::Index k = static_cast<Eigen::Index>(f.sigma.size());
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(f.rows(), f.cols());
  for (Eigen::Index j = 0; j < k; ++j) {
    out += f.sigma[static_cast<std::size_t>(j)] * f.u.col(j) * f.v.col(j).adjoint();
  }
  return out;
}

/// V_r diag(1/sigma_i) U_r*, truncated at the factor rank.
template <typename Scalar>
MatrixX<Scalar> pinv_from_svd(const SvdFactors<Scalar>& f) {
  const Eigen::Index r = f.rank;
  MatrixX<Scalar> scaled = f.v.leftCols(r);
  for (Eigen::Index j = 0; j < r; ++j) scaled.col(j) /= f.sigma[static_cast<std::size_t>(j)];
  return scaled * f.u.leftCols(r).adjoint();
}

template <typename Scalar>
MatrixX<Scalar> pinv_oracle(const MatrixX<Scalar>& a, std::optional<Tolerance> tol = std::nullopt) {
  return pinv_from_svd(svd(a, tol));
}

template <typename Scalar>
PenroseResiduals penrose_residuals(const MatrixX<Scalar>& a, const MatrixX<Scalar>& z) {
  if (z.rows() != a.cols() || z.cols() != a.rows()) {
    throw DimensionError("penrose_residuals: candidate is " + detail::shape(z) + " for a " +
                         detail::shape(a) + " matrix");
  }
  using Real = RealOf<Scalar>;
  const auto rel = [](const auto& diff, Real ref) {
    return static_cast<double>(diff.norm() / std::max(Real(1), ref));
  };
  const MatrixX<Scalar> az = a * z;
  const MatrixX<Scalar> za = z * a;
  PenroseResiduals r;
  r.r_a = rel(az * a - a, a.norm());
  r.r_b = rel(za * z - z, z.norm());
  r.r_c = rel(az - az.adjoint(), az.norm());
  r.r_d = rel(za - za.adjoint(), za.norm());
  return r;
}

/// General inverse by partial-pivot LU.
template <typename Scalar>
MatrixX<Scalar> inverse(const MatrixX<Scalar>& a) {
  detail::require_square("inverse", a);
  using Real = RealOf<Scalar>;
  const Eigen::Index n = a.rows();
  if (n == 0) return MatrixX<Scalar>(0, 0);
  const Eigen::PartialPivLU<MatrixX<Scalar>> lu(a);
  const Real cutoff = Real(n) * std::numeric_limits<Real>::epsilon() * a.norm();
  const Real min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > cutoff)) {
    std::ostringstream os;
    os << "inverse: matrix is numerically singular (pivot " << min_pivot << " <= " << cutoff << ")";
    throw SingularMatrixError(os.str());
  }
  return lu.inverse();
}

/// Solve a x = b for Hermitian positive definite a via Cholesky.
template <typename Scalar>
MatrixX<Scalar> solve_hpd(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  detail::require_square("solve_hpd", a);
  if (b.rows() != a.rows()) {
    throw DimensionError("solve_hpd: rhs " + detail::shape(b) + " does not match " +
                         detail::shape(a));
  }
  if (a.rows() == 0) return MatrixX<Scalar>(0, b.cols());
  const Eigen::LLT<MatrixX<Scalar>> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("solve_hpd: Cholesky met a nonpositive diagonal entry");
  }
  return llt.solve(b);
}

}  // namespace mpx
