#pragma once

// Closed-form Moore-Penrose inverses of structured matrices:
//
//   pinv_block          2x2 block matrix [[A, C], [B, D]] with D = B A† C
//   pinv_xn / pinv_ny   X N and N Y with X, Y nonsingular
//   proj_range_m1       (XN)(XN)†
//   proj_rowspace_m2    (NY)†(NY)
//   pinv_xny            X N Y under block-triangular X and Y
//   pinv_xny_hermitian  X N Y when X E_N and F_N Y are Hermitian
//   pinv_xny_baseline   X N Y when X E_N = E_N and F_N Y = F_N
//
// None of the product formulas decomposes the product itself: N† and the
// projectors come from the supplied SVD of N, inner inverses of the form
// I + W*W go through a Cholesky solve, X⁻¹ and Y⁻¹ through LU.

#include <string>
#include <string_view>
#include <vector>

#include "mpx/decomp.hpp"
#include "mpx/errors.hpp"
#include "mpx/matrix.hpp"
#include "mpx/structure.hpp"

namespace mpx {

enum class Method { oracle, lemma21, thm31_xn, thm31_ny, thm33, cor34, cgms11 };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::oracle: return "oracle";
    case Method::lemma21: return "lemma21";
    case Method::thm31_xn: return "thm31-xn";
    case Method::thm31_ny: return "thm31-ny";
    case Method::thm33: return "thm33";
    case Method::cor34: return "cor34";
    case Method::cgms11: return "cgms11";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::oracle, Method::lemma21, Method::thm31_xn, Method::thm31_ny,
                   Method::thm33, Method::cor34, Method::cgms11}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

enum class HypothesisMode { strict, permissive };

struct PinvOptions {
  Tolerance tol{kStructureTol};
  HypothesisMode mode = HypothesisMode::strict;
  bool compute_residuals = true;  // off for timing runs
};

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  double residual = 0;
};

template <typename Scalar>
struct PinvResult {
  MatrixX<Scalar> z;
  Method method = Method::oracle;
  PenroseResiduals residuals;  // recomputed against the source matrix
  std::vector<HypothesisCheck> hypothesis_checks;

  bool hypotheses_hold() const {
    for (const auto& h : hypothesis_checks) {
      if (!h.passed) return false;
    }
    return true;
  }
};

namespace detail {

inline void record(std::vector<HypothesisCheck>& checks, const PinvOptions& opts, std::string name,
                   double residual, const std::string& detail_label = "residual") {
  const bool passed = residual <= opts.tol.value;
  checks.push_back({name, passed, residual});
  if (!passed && opts.mode == HypothesisMode::strict) {
    std::ostringstream os;
    os << "hypothesis " << name << " violated: " << detail_label << "=" << residual
       << " > tol=" << opts.tol.value;
    throw HypothesisError(std::move(name), residual, os.str());
  }
}

// A1 check recorded as the relative off-block norm; the message carries the
// absolute off-block norm too.
template <typename Scalar>
void record_structure(std::vector<HypothesisCheck>& checks, const PinvOptions& opts,
                      const StructureReport<Scalar>& rep) {
  const std::string name = rep.side == Side::x ? "A1" : "A2";
  const double rel = rep.off_block_norm / rep.scale;
  const bool passed = rep.off_block_norm <= opts.tol.value * rep.scale;
  checks.push_back({name, passed, rel});
  if (!passed && opts.mode == HypothesisMode::strict) {
    std::ostringstream os;
    os << "assumption " << name << " violated on the " << to_string(rep.side)
       << " side: off_block_norm=" << rep.off_block_norm << " (relative " << rel
       << ", tol=" << opts.tol.value << ")";
    throw HypothesisError(name, rel, os.str());
  }
}

// (I + W*W)⁻¹ (I + W*)
template <typename Scalar>
MatrixX<Scalar> right_correction(const MatrixX<Scalar>& w) {
  const Eigen::Index k = w.rows();
  const MatrixX<Scalar> id = identity<Scalar>(k);
  return solve_hpd<Scalar>(id + w.adjoint() * w, id + w.adjoint());
}

// (I + W*)(I + W W*)⁻¹ = [(I + W W*)⁻¹ (I + W)]*
template <typename Scalar>
MatrixX<Scalar> left_correction(const MatrixX<Scalar>& w) {
  const Eigen::Index k = w.rows();
  const MatrixX<Scalar> id = identity<Scalar>(k);
  return solve_hpd<Scalar>(id + w * w.adjoint(), id + w).adjoint();
}

// P z for P = Q Q*, Q with orthonormal columns.
template <typename Scalar, typename Basis>
MatrixX<Scalar> project_left(const Basis& q, const MatrixX<Scalar>& z) {
  return q * (q.adjoint() * z);
}

template <typename Scalar, typename Basis>
MatrixX<Scalar> project_right(const MatrixX<Scalar>& z, const Basis& q) {
  return (z * q) * q.adjoint();
}

template <typename Scalar>
void require_square_side(const char* op, const char* which, const MatrixX<Scalar>& a,
                         Eigen::Index dim) {
  if (a.rows() != dim || a.cols() != dim) {
    std::ostringstream os;
    os << op << ": " << which << " must be " << dim << "x" << dim << ", got " << shape(a);
    throw DimensionError(os.str());
  }
}

template <typename Scalar>
void require_svd_of(const char* op, const MatrixX<Scalar>& n, const SvdFactors<Scalar>& f) {
  if (n.rows() != f.rows() || n.cols() != f.cols()) {
    throw DimensionError(std::string(op) + ": SVD factors do not match N " + shape(n));
  }
}

template <typename Scalar>
PinvResult<Scalar> finish(Method method, const MatrixX<Scalar>& source, MatrixX<Scalar> z,
                          std::vector<HypothesisCheck> checks, bool with_residuals = true) {
  PinvResult<Scalar> out;
  if (with_residuals) out.residuals = penrose_residuals(source, z);
  out.z = std::move(z);
  out.method = method;
  out.hypothesis_checks = std::move(checks);
  return out;
}

}  // namespace detail

template <typename Scalar>
PinvResult<Scalar> pinv_oracle_result(const MatrixX<Scalar>& m,
                                      std::optional<Tolerance> rank_tol = std::nullopt) {
  return detail::finish<Scalar>(Method::oracle, m, pinv_oracle(m, rank_tol), {});
}

/// Moore-Penrose inverse of [[A, C], [B, D]] when R(B*) ⊆ R(A*), R(C) ⊆ R(A)
/// and D = B A† C:
///
///   M† = [I; (A†C)*] Ψ A† Φ [I, (BA†)*]
///   Φ = (I + (BA†)* BA†)⁻¹,  Ψ = (I + A†C (A†C)*)⁻¹
template <typename Scalar>
PinvResult<Scalar> pinv_block(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                              const MatrixX<Scalar>& c, const MatrixX<Scalar>& d,
                              const PinvOptions& opts = {}) {
  if (b.cols() != a.cols() || c.rows() != a.rows() || d.rows() != b.rows() ||
      d.cols() != c.cols()) {
    throw DimensionError("pinv_block: non-conformal blocks A " + detail::shape(a) + ", B " +
                         detail::shape(b) + ", C " + detail::shape(c) + ", D " +
                         detail::shape(d));
  }
  using Real = RealOf<Scalar>;
  const auto rel = [](const MatrixX<Scalar>& diff, const MatrixX<Scalar>& ref) {
    return static_cast<double>(diff.norm() / std::max(Real(1), ref.norm()));
  };

  const MatrixX<Scalar> a_pinv = pinv_oracle(a);
  const MatrixX<Scalar> ba = b * a_pinv;  // B A†
  const MatrixX<Scalar> ac = a_pinv * c;  // A† C

  std::vector<HypothesisCheck> checks;
  detail::record(checks, opts, "range(B*) in range(A*)", rel(b - ba * a, b));
  detail::record(checks, opts, "range(C) in range(A)", rel(c - a * ac, c));
  detail::record(checks, opts, "D = B A+ C", rel(d - ba * c, d));

  // Ψ A† Φ with both inverses applied by Cholesky solves; Φ is Hermitian so
  // W Φ = (Φ W*)*.
  const Eigen::Index q = a.cols();
  const Eigen::Index p = a.rows();
  const MatrixX<Scalar> psi_a = solve_hpd<Scalar>(identity<Scalar>(q) + ac * ac.adjoint(), a_pinv);
  const MatrixX<Scalar> core =
      solve_hpd<Scalar>(identity<Scalar>(p) + ba.adjoint() * ba, psi_a.adjoint()).adjoint();

  MatrixX<Scalar> z(q + c.cols(), p + b.rows());
  z.topLeftCorner(q, p) = core;
  z.topRightCorner(q, b.rows()) = core * ba.adjoint();
  z.bottomLeftCorner(c.cols(), p) = ac.adjoint() * core;
  z.bottomRightCorner(c.cols(), b.rows()) = ac.adjoint() * core * ba.adjoint();

  return detail::finish<Scalar>(Method::lemma21, block_assemble<Scalar>(a, c, b, d), std::move(z),
                                std::move(checks), opts.compute_residuals);
}

/// (XN)† = N† X⁻¹ N N† (I + R*R)⁻¹ (I + R*) under assumption A1.
template <typename Scalar>
PinvResult<Scalar> pinv_xn(const MatrixX<Scalar>& x, const MatrixX<Scalar>& n,
                           const SvdFactors<Scalar>& f, const PinvOptions& opts = {}) {
  detail::require_svd_of("pinv_xn", n, f);
  detail::require_square_side("pinv_xn", "X", x, n.rows());
  std::vector<HypothesisCheck> checks;
  detail::record_structure(checks, opts, structure_report_x(x, f, opts.tol));

  const MatrixX<Scalar> x_inv = inverse(x);
  const MatrixX<Scalar> r = factor_r(x, f);
  const auto u_r = f.u.leftCols(f.rank);
  const MatrixX<Scalar> tail = detail::project_left<Scalar>(u_r, detail::right_correction(r));
  const MatrixX<Scalar> z = pinv_from_svd(f) * (x_inv * tail);
  return detail::finish<Scalar>(Method::thm31_xn, MatrixX<Scalar>(x * n), z, std::move(checks),
                                opts.compute_residuals);
}

/// (NY)† = (I + L*)(I + L L*)⁻¹ N† N Y⁻¹ N† under assumption A2.
template <typename Scalar>
PinvResult<Scalar> pinv_ny(const MatrixX<Scalar>& n, const MatrixX<Scalar>& y,
                           const SvdFactors<Scalar>& f, const PinvOptions& opts = {}) {
  detail::require_svd_of("pinv_ny", n, f);
  detail::require_square_side("pinv_ny", "Y", y, n.cols());
  std::vector<HypothesisCheck> checks;
  detail::record_structure(checks, opts, structure_report_y(y, f, opts.tol));

  const MatrixX<Scalar> y_inv = inverse(y);
  const MatrixX<Scalar> l = factor_l(y, f);
  const auto v_r = f.v.leftCols(f.rank);
  const MatrixX<Scalar> head = detail::project_right<Scalar>(detail::left_correction(l), v_r);
  const MatrixX<Scalar> z = (head * y_inv) * pinv_from_svd(f);
  return detail::finish<Scalar>(Method::thm31_ny, MatrixX<Scalar>(n * y), z, std::move(checks),
                                opts.compute_residuals);
}

/// (XN)(XN)† = (I + R) N N† (I + R*R)⁻¹ (I + R*)
template <typename Scalar>
MatrixX<Scalar> proj_range_m1(const MatrixX<Scalar>& x, const MatrixX<Scalar>& n,
                              const SvdFactors<Scalar>& f, const PinvOptions& opts = {}) {
  detail::require_svd_of("proj_range_m1", n, f);
  detail::require_square_side("proj_range_m1", "X", x, n.rows());
  std::vector<HypothesisCheck> checks;
  detail::record_structure(checks, opts, structure_report_x(x, f, opts.tol));

  const MatrixX<Scalar> r = factor_r(x, f);
  const auto u_r = f.u.leftCols(f.rank);
  const MatrixX<Scalar> id = identity<Scalar>(n.rows());
  return (id + r) * detail::project_left<Scalar>(u_r, detail::right_correction(r));
}

/// (NY)†(NY) = (I + L*)(I + L L*)⁻¹ N† N (I + L)
template <typename Scalar>
MatrixX<Scalar> proj_rowspace_m2(const MatrixX<Scalar>& n, const MatrixX<Scalar>& y,
                                 const SvdFactors<Scalar>& f, const PinvOptions& opts = {}) {
  detail::require_svd_of("proj_rowspace_m2", n, f);
  detail::require_square_side("proj_rowspace_m2", "Y", y, n.cols());
  std::vector<HypothesisCheck> checks;
  detail::record_structure(checks, opts, structure_report_y(y, f, opts.tol));

  const MatrixX<Scalar> l = factor_l(y, f);
  const auto v_r = f.v.leftCols(f.rank);
  const MatrixX<Scalar> id = identity<Scalar>(n.cols());
  return detail::project_right<Scalar>(detail::left_correction(l), v_r) * (id + l);
}

/// Y⁻¹ N† X⁻¹, an inner inverse of X N Y for any nonsingular X, Y.
template <typename Scalar>
MatrixX<Scalar> naive_inverse(const MatrixX<Scalar>& x, const SvdFactors<Scalar>& f,
                              const MatrixX<Scalar>& y) {
  return inverse(y) * (pinv_from_svd(f) * inverse(x));
}

/// (XNY)† = (I + L*)(I + LL*)⁻¹ N†N (Y⁻¹N†X⁻¹) NN† (I + R*R)⁻¹(I + R*)
/// under assumptions A1 and A2.
template <typename Scalar>
PinvResult<Scalar> pinv_xny(const MatrixX<Scalar>& x, const MatrixX<Scalar>& n,
                            const MatrixX<Scalar>& y, const SvdFactors<Scalar>& f,
                            const PinvOptions& opts = {}) {
  detail::require_svd_of("pinv_xny", n, f);
  detail::require_square_side("pinv_xny", "X", x, n.rows());
  detail::require_square_side("pinv_xny", "Y", y, n.cols());
  std::vector<HypothesisCheck> checks;
  detail::record_structure(checks, opts, structure_report_x(x, f, opts.tol));
  detail::record_structure(checks, opts, structure_report_y(y, f, opts.tol));

  const MatrixX<Scalar> head = detail::left_correction(factor_l(y, f));
  const MatrixX<Scalar> tail = detail::right_correction(factor_r(x, f));
  const auto u_r = f.u.leftCols(f.rank);
  const auto v_r = f.v.leftCols(f.rank);

  // N†N K NN† = V_r (V_r* K U_r) U_r*
  const MatrixX<Scalar> core = v_r.adjoint() * naive_inverse(x, f, y) * u_r;
  const MatrixX<Scalar> z = (head * v_r) * core * (u_r.adjoint() * tail);
  return detail::finish<Scalar>(Method::thm33, MatrixX<Scalar>(x * n * y), z, std::move(checks),
                                opts.compute_residuals);
}

/// (XNY)† = (I + L*)(I + LL*)⁻¹ Y⁻¹N†X⁻¹ (I + R*R)⁻¹(I + R*) when X E_N and
/// F_N Y are Hermitian.
template <typename Scalar>
PinvResult<Scalar> pinv_xny_hermitian(const MatrixX<Scalar>& x, const MatrixX<Scalar>& n,
                                      const MatrixX<Scalar>& y, const SvdFactors<Scalar>& f,
                                      const PinvOptions& opts = {}) {
  detail::require_svd_of("pinv_xny_hermitian", n, f);
  detail::require_square_side("pinv_xny_hermitian", "X", x, n.rows());
  detail::require_square_side("pinv_xny_hermitian", "Y", y, n.cols());
  const auto proj = projectors(f);
  const auto skew = [](const MatrixX<Scalar>& a) {
    return static_cast<double>((a - a.adjoint()).norm() /
                               std::max(RealOf<Scalar>(1), a.norm()));
  };
  std::vector<HypothesisCheck> checks;
  detail::record(checks, opts, "X E_N Hermitian", skew(x * proj.e_n));
  detail::record(checks, opts, "F_N Y Hermitian", skew(proj.f_n * y));

  const MatrixX<Scalar> head = detail::left_correction(factor_l(y, f));
  const MatrixX<Scalar> tail = detail::right_correction(factor_r(x, f));
  const MatrixX<Scalar> z = head * naive_inverse(x, f, y) * tail;
  return detail::finish<Scalar>(Method::cor34, MatrixX<Scalar>(x * n * y), z, std::move(checks),
                                opts.compute_residuals);
}

/// (XNY)† = (I + L₀*)(I + L₀L₀*)⁻¹ Y⁻¹N†X⁻¹ (I + R₀*R₀)⁻¹(I + R₀*) when
/// X E_N = E_N and F_N Y = F_N.
template <typename Scalar>
PinvResult<Scalar> pinv_xny_baseline(const MatrixX<Scalar>& x, const MatrixX<Scalar>& n,
                                     const MatrixX<Scalar>& y, const SvdFactors<Scalar>& f,
                                     const PinvOptions& opts = {}) {
  detail::require_svd_of("pinv_xny_baseline", n, f);
  detail::require_square_side("pinv_xny_baseline", "X", x, n.rows());
  detail::require_square_side("pinv_xny_baseline", "Y", y, n.cols());
  using Real = RealOf<Scalar>;
  const auto proj = projectors(f);
  const auto rel = [](const MatrixX<Scalar>& diff, const MatrixX<Scalar>& ref) {
    return static_cast<double>(diff.norm() / std::max(Real(1), ref.norm()));
  };
  std::vector<HypothesisCheck> checks;
  detail::record(checks, opts, "X E_N = E_N", rel(x * proj.e_n - proj.e_n, x));
  detail::record(checks, opts, "F_N Y = F_N", rel(proj.f_n * y - proj.f_n, y));

  const MatrixX<Scalar> head = detail::left_correction(factor_l0(y, f));
  const MatrixX<Scalar> tail = detail::right_correction(factor_r0(x, f));
  const MatrixX<Scalar> z = head * naive_inverse(x, f, y) * tail;
  return detail::finish<Scalar>(Method::cgms11, MatrixX<Scalar>(x * n * y), z, std::move(checks),
                                opts.compute_residuals);
}

/// ‖M W M − M‖_F ≤ tol · max(1, ‖M‖_F)
template <typename Scalar>
bool inner_inverse_check(const MatrixX<Scalar>& m, const MatrixX<Scalar>& w, Tolerance tol) {
  if (w.rows() != m.cols() || w.cols() != m.rows()) {
    throw DimensionError("inner_inverse_check: " + detail::shape(w) + " cannot invert " +
                         detail::shape(m));
  }
  using Real = RealOf<Scalar>;
  return (m * w * m - m).norm() <= Real(tol.value) * std::max(Real(1), m.norm());
}

}  // namespace mpx
