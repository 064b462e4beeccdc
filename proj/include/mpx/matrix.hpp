#pragma once

// Dense complex matrix primitives shared by every other module.
//
// All matrices are Eigen row-major dynamic matrices over a complex scalar.
// Functions are templated on the scalar so that single/extended precision
// instantiations are possible; the library and CLI use std::complex<double>.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "mpx/errors.hpp"

namespace mpx {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RealOf = typename Eigen::NumTraits<Scalar>::Real;

using Complex = std::complex<double>;
using ComplexMatrix = MatrixX<Complex>;

/// Relative, dimensionless comparison threshold.
struct Tolerance {
  double value = 1e-10;

  constexpr Tolerance() = default;
  constexpr explicit Tolerance(double v) : value(v) {}
};

namespace detail {

template <typename A>
std::string shape(const A& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

template <typename A, typename B>
void require_same_shape(const char* op, const A& a, const B& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

template <typename A>
void require_square(const char* op, const A& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(op) + ": expected square matrix, got " + shape(a));
  }
}

}  // namespace detail

template <typename Scalar>
MatrixX<Scalar> identity(Eigen::Index n) {
  return MatrixX<Scalar>::Identity(n, n);
}

template <typename Scalar>
MatrixX<Scalar> conj_transpose(const MatrixX<Scalar>& a) {
  return a.adjoint();
}

template <typename Scalar>
MatrixX<Scalar> matmul(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + detail::shape(a) + " * " +
                         detail::shape(b));
  }
  return a * b;
}

template <typename Scalar>
MatrixX<Scalar> add(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  detail::require_same_shape("add", a, b);
  return a + b;
}

template <typename Scalar>
MatrixX<Scalar> sub(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  detail::require_same_shape("sub", a, b);
  return a - b;
}

template <typename Scalar>
MatrixX<Scalar> scale(const Scalar& c, const MatrixX<Scalar>& a) {
  return c * a;
}

template <typename Derived>
RealOf<typename Derived::Scalar> frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

/// ‖a − b‖_F ≤ tol · max(1, ‖a‖_F, ‖b‖_F)
template <typename Scalar>
bool approx_eq(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b, Tolerance tol) {
  detail::require_same_shape("approx_eq", a, b);
  using Real = RealOf<Scalar>;
  const Real guard = std::max({Real(1), a.norm(), b.norm()});
  return (a - b).norm() <= Real(tol.value) * guard;
}

/// Relative Frobenius distance ‖a − b‖_F / max(1, ‖a‖_F, ‖b‖_F), the
/// quantity approx_eq thresholds.
template <typename Scalar>
RealOf<Scalar> relative_distance(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  detail::require_same_shape("relative_distance", a, b);
  using Real = RealOf<Scalar>;
  return (a - b).norm() / std::max({Real(1), a.norm(), b.norm()});
}

template <typename Scalar>
bool is_normal(const MatrixX<Scalar>& a, Tolerance tol) {
  detail::require_square("is_normal", a);
  using Real = RealOf<Scalar>;
  const Real n = a.norm();
  const MatrixX<Scalar> commutator = a * a.adjoint() - a.adjoint() * a;
  return commutator.norm() <= Real(tol.value) * std::max(Real(1), n * n);
}

template <typename Scalar>
bool is_hermitian(const MatrixX<Scalar>& a, Tolerance tol) {
  detail::require_square("is_hermitian", a);
  using Real = RealOf<Scalar>;
  return (a - a.adjoint()).norm() <= Real(tol.value) * std::max(Real(1), a.norm());
}

/// Four blocks of a 2x2 partition. Any block may be empty.
template <typename Scalar>
struct Blocks {
  MatrixX<Scalar> top_left;
  MatrixX<Scalar> top_right;
  MatrixX<Scalar> bottom_left;
  MatrixX<Scalar> bottom_right;
};

template <typename Scalar>
Blocks<Scalar> block_split(const MatrixX<Scalar>& a, Eigen::Index row_cut, Eigen::Index col_cut) {
  if (row_cut < 0 || row_cut > a.rows() || col_cut < 0 || col_cut > a.cols()) {
    std::ostringstream os;
    os << "block_split: cut (" << row_cut << ", " << col_cut << ") out of range for "
       << detail::shape(a);
    throw DimensionError(os.str());
  }
  const Eigen::Index lower = a.rows() - row_cut;
  const Eigen::Index right = a.cols() - col_cut;
  return {a.topLeftCorner(row_cut, col_cut), a.topRightCorner(row_cut, right),
          a.bottomLeftCorner(lower, col_cut), a.bottomRightCorner(lower, right)};
}

template <typename Scalar>
MatrixX<Scalar> block_assemble(const Blocks<Scalar>& b) {
  const Eigen::Index top = b.top_left.rows();
  const Eigen::Index left = b.top_left.cols();
  const Eigen::Index bottom = b.bottom_right.rows();
  const Eigen::Index right = b.bottom_right.cols();
  if (b.top_right.rows() != top || b.top_right.cols() != right || b.bottom_left.rows() != bottom ||
      b.bottom_left.cols() != left) {
    throw DimensionError("block_assemble: non-conformal blocks " + detail::shape(b.top_left) + ", " +
                         detail::shape(b.top_right) + ", " + detail::shape(b.bottom_left) + ", " +
                         detail::shape(b.bottom_right));
  }
  MatrixX<Scalar> out(top + bottom, left + right);
  out.topLeftCorner(top, left) = b.top_left;
  out.topRightCorner(top, right) = b.top_right;
  out.bottomLeftCorner(bottom, left) = b.bottom_left;
  out.bottomRightCorner(bottom, right) = b.bottom_right;
  return out;
}

template <typename Scalar>
MatrixX<Scalar> block_assemble(const MatrixX<Scalar>& a11, const MatrixX<Scalar>& a12,
                               const MatrixX<Scalar>& a21, const MatrixX<Scalar>& a22) {
  return block_assemble(Blocks<Scalar>{a11, a12, a21, a22});
}

}  // namespace mpx
