#pragma once

// Orthogonal projectors of N, the correction factors R and L, block
// structure of X and Y in the singular bases of N, and the sufficient
// conditions that force that structure.
//
// Every quantity here is computed from a caller-supplied SvdFactors so that
// verdicts, reports and formulas share one basis.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mpx/decomp.hpp"
#include "mpx/errors.hpp"
#include "mpx/matrix.hpp"

namespace mpx {

/// Default relative tolerance for structural checks.
inline constexpr double kStructureTol = 1e-10;

template <typename Scalar>
struct ProjectorPair {
  MatrixX<Scalar> e_n;  // I - N N†, onto N(N*)
  MatrixX<Scalar> f_n;  // I - N† N, onto N(N)
};

// U_r U_r*  (= N N†)
template <typename Scalar>
MatrixX<Scalar> range_projector(const SvdFactors<Scalar>& f) {
  const auto lead = f.u.leftCols(f.rank);
  return lead * lead.adjoint();
}

// V_r V_r*  (= N† N)
template <typename Scalar>
MatrixX<Scalar> corange_projector(const SvdFactors<Scalar>& f) {
  const auto lead = f.v.leftCols(f.rank);
  return lead * lead.adjoint();
}

template <typename Scalar>
ProjectorPair<Scalar> projectors(const SvdFactors<Scalar>& f) {
  const auto u_tail = f.u.rightCols(f.rows() - f.rank);
  const auto v_tail = f.v.rightCols(f.cols() - f.rank);
  return {u_tail * u_tail.adjoint(), v_tail * v_tail.adjoint()};
}

/// N N* = U_r Σ² U_r*
template <typename Scalar>
MatrixX<Scalar> gram_left(const SvdFactors<Scalar>& f) {
  MatrixX<Scalar> scaled = f.u.leftCols(f.rank);
  for (Eigen::Index j = 0; j < f.rank; ++j) {
    const auto s = f.sigma[static_cast<std::size_t>(j)];
    scaled.col(j) *= s * s;
  }
  return scaled * f.u.leftCols(f.rank).adjoint();
}

/// N* N = V_r Σ² V_r*
template <typename Scalar>
MatrixX<Scalar> gram_right(const SvdFactors<Scalar>& f) {
  MatrixX<Scalar> scaled = f.v.leftCols(f.rank);
  for (Eigen::Index j = 0; j < f.rank; ++j) {
    const auto s = f.sigma[static_cast<std::size_t>(j)];
    scaled.col(j) *= s * s;
  }
  return scaled * f.v.leftCols(f.rank).adjoint();
}

namespace detail {

template <typename Scalar>
void require_side(const char* op, const MatrixX<Scalar>& a, Eigen::Index dim) {
  if (a.rows() != dim || a.cols() != dim) {
    std::ostringstream os;
    os << op << ": expected " << dim << "x" << dim << " matrix, got " << shape(a);
    throw DimensionError(os.str());
  }
}

}  // namespace detail

/// R = X E_N X⁻¹ (E_N − I)
template <typename Scalar>
MatrixX<Scalar> factor_r(const MatrixX<Scalar>& x, const SvdFactors<Scalar>& f) {
  detail::require_side("factor_r", x, f.rows());
  const MatrixX<Scalar> e = projectors(f).e_n;
  const MatrixX<Scalar> x_inv = inverse(x);
  return x * e * x_inv * (e - identity<Scalar>(f.rows()));
}

/// L = (F_N − I) Y⁻¹ F_N Y
template <typename Scalar>
MatrixX<Scalar> factor_l(const MatrixX<Scalar>& y, const SvdFactors<Scalar>& f) {
  detail::require_side("factor_l", y, f.cols());
  const MatrixX<Scalar> fn = projectors(f).f_n;
  const MatrixX<Scalar> y_inv = inverse(y);
  return (fn - identity<Scalar>(f.cols())) * y_inv * fn * y;
}

/// R₀ = E_N (I − X⁻¹)
template <typename Scalar>
MatrixX<Scalar> factor_r0(const MatrixX<Scalar>& x, const SvdFactors<Scalar>& f) {
  detail::require_side("factor_r0", x, f.rows());
  return projectors(f).e_n * (identity<Scalar>(f.rows()) - inverse(x));
}

/// L₀ = (I − Y⁻¹) F_N
template <typename Scalar>
MatrixX<Scalar> factor_l0(const MatrixX<Scalar>& y, const SvdFactors<Scalar>& f) {
  detail::require_side("factor_l0", y, f.cols());
  return (identity<Scalar>(f.cols()) - inverse(y)) * projectors(f).f_n;
}

enum class Side { x, y };

inline std::string_view to_string(Side s) { return s == Side::x ? "X" : "Y"; }

/// Blocks of U*XU (or V*YV) split at the rank of N.
///
/// X side: top_left = X1, top_right = X3 (must vanish), bottom_left = X2,
/// bottom_right = X4. Y side: top_left = Y1, top_right = Y3, bottom_left is
/// the off-block (must vanish), bottom_right = Y4.
template <typename Scalar>
struct StructureReport {
  Side side = Side::x;
  Blocks<Scalar> blocks;
  double off_block_norm = 0;
  double scale = 1;  // max(1, ‖X‖_F)
  double tol = kStructureTol;
  bool satisfied = true;

  const MatrixX<Scalar>& off_block() const {
    return side == Side::x ? blocks.top_right : blocks.bottom_left;
  }
};

template <typename Scalar>
StructureReport<Scalar> structure_report_x(const MatrixX<Scalar>& x, const SvdFactors<Scalar>& f,
                                           Tolerance tol = Tolerance{kStructureTol}) {
  detail::require_side("structure_report_x", x, f.rows());
  StructureReport<Scalar> rep;
  rep.side = Side::x;
  rep.blocks = block_split<Scalar>(f.u.adjoint() * x * f.u, f.rank, f.rank);
  rep.off_block_norm = static_cast<double>(rep.blocks.top_right.norm());
  rep.scale = std::max(1.0, static_cast<double>(x.norm()));
  rep.tol = tol.value;
  rep.satisfied = rep.off_block_norm <= tol.value * rep.scale;
  return rep;
}

template <typename Scalar>
StructureReport<Scalar> structure_report_y(const MatrixX<Scalar>& y, const SvdFactors<Scalar>& f,
                                           Tolerance tol = Tolerance{kStructureTol}) {
  detail::require_side("structure_report_y", y, f.cols());
  StructureReport<Scalar> rep;
  rep.side = Side::y;
  rep.blocks = block_split<Scalar>(f.v.adjoint() * y * f.v, f.rank, f.rank);
  rep.off_block_norm = static_cast<double>(rep.blocks.bottom_left.norm());
  rep.scale = std::max(1.0, static_cast<double>(y.norm()));
  rep.tol = tol.value;
  rep.satisfied = rep.off_block_norm <= tol.value * rep.scale;
  return rep;
}

/// Reassemble a report's blocks and conjugate back out of the singular basis.
template <typename Scalar>
MatrixX<Scalar> reassemble(const StructureReport<Scalar>& rep, const SvdFactors<Scalar>& f) {
  const MatrixX<Scalar>& basis = rep.side == Side::x ? f.u : f.v;
  return basis * block_assemble(rep.blocks) * basis.adjoint();
}

// ---------------------------------------------------------------------------
// Sufficient conditions for the block structure.

enum class ConditionId { c1, c2, c3, c4, c5, c6, c7, c1p, c2p, c3p, c4p, c5p, c6p, c7p };

inline constexpr std::array<ConditionId, 14> kAllConditions = {
    ConditionId::c1,  ConditionId::c2,  ConditionId::c3,  ConditionId::c4,  ConditionId::c5,
    ConditionId::c6,  ConditionId::c7,  ConditionId::c1p, ConditionId::c2p, ConditionId::c3p,
    ConditionId::c4p, ConditionId::c5p, ConditionId::c6p, ConditionId::c7p};

inline Side side_of(ConditionId id) {
  return static_cast<int>(id) < static_cast<int>(ConditionId::c1p) ? Side::x : Side::y;
}

/// 1..7 within its side.
inline int ordinal(ConditionId id) { return static_cast<int>(id) % 7 + 1; }

inline std::string to_string(ConditionId id) {
  std::string s = "C" + std::to_string(ordinal(id));
  if (side_of(id) == Side::y) s += "'";
  return s;
}

/// Accepts "C3", "c3", "C3'" and "C3p".
inline std::optional<ConditionId> parse_condition(std::string_view s) {
  if (s.size() < 2 || (s[0] != 'C' && s[0] != 'c')) return std::nullopt;
  const char d = s[1];
  if (d < '1' || d > '7') return std::nullopt;
  int idx = d - '1';
  const std::string_view rest = s.substr(2);
  if (rest == "'" || rest == "p" || rest == "P") {
    idx += 7;
  } else if (!rest.empty()) {
    return std::nullopt;
  }
  return static_cast<ConditionId>(idx);
}

struct ConditionSearch {
  int k_max = 8;
  Tolerance tol{kStructureTol};
};

template <typename Scalar>
struct Witness {
  int k = 0;
  int ell = 0;  // 0 when the condition has no ℓ
  std::optional<Scalar> c;
};

template <typename Scalar>
struct ConditionVerdict {
  ConditionId id = ConditionId::c1;
  bool holds = false;
  std::optional<Witness<Scalar>> witness;
  double residual = 0;  // of the witness, or the best attempt when none
};

namespace detail {

struct Fit {
  std::complex<double> c;
  double residual;  // ‖C − cT‖ / ‖C‖ (0 when C = 0 and T = 0)
};

// Least-squares scalar c minimising ‖candidate − c target‖_F.
template <typename Scalar>
Fit fit_scalar(const MatrixX<Scalar>& candidate, const MatrixX<Scalar>& target) {
  const auto tt = target.squaredNorm();
  const auto cn = candidate.norm();
  if (tt == 0) {
    // Any c fits a zero target exactly iff the candidate also vanishes.
    return {1.0, cn == 0 ? 0.0 : 1.0};
  }
  const Scalar num = target.conjugate().cwiseProduct(candidate).sum();  // <T, C>
  const Scalar fitted = num / tt;
  const double res = cn == 0 ? 0.0 : static_cast<double>((candidate - fitted * target).norm() / cn);
  return {std::complex<double>(fitted), res};
}

template <typename Scalar>
ConditionVerdict<Scalar> check_normal(ConditionId id, const MatrixX<Scalar>& a, Tolerance tol) {
  ConditionVerdict<Scalar> v;
  v.id = id;
  const double n = a.norm();
  const MatrixX<Scalar> comm = a * a.adjoint() - a.adjoint() * a;
  v.residual = comm.norm() / std::max(1.0, n * n);
  v.holds = is_normal(a, tol);
  return v;
}

// Search k (and ℓ when ell_max > 0) for base^k ≈ c target(ℓ) with c ≠ 0.
template <typename Scalar, typename TargetFn>
ConditionVerdict<Scalar> check_power(ConditionId id, const MatrixX<Scalar>& base, int ell_max,
                                     TargetFn target_of, const ConditionSearch& search) {
  ConditionVerdict<Scalar> v;
  v.id = id;
  v.residual = std::numeric_limits<double>::infinity();
  std::vector<MatrixX<Scalar>> targets;
  for (int ell = 1; ell <= std::max(ell_max, 1); ++ell) targets.push_back(target_of(ell));

  MatrixX<Scalar> power = base;
  for (int k = 1; k <= search.k_max; ++k) {
    if (k > 1) power = (power * base).eval();
    for (int ell = 1; ell <= std::max(ell_max, 1); ++ell) {
      const Fit fit = fit_scalar(power, targets[static_cast<std::size_t>(ell - 1)]);
      const bool ok = fit.residual <= search.tol.value && std::abs(fit.c) > search.tol.value;
      if (ok) {
        v.holds = true;
        v.residual = fit.residual;
        v.witness = Witness<Scalar>{k, ell_max > 0 ? ell : 0, Scalar(fit.c)};
        return v;
      }
      v.residual = std::min(v.residual, fit.residual);
    }
  }
  return v;
}

}  // namespace detail

/// Evaluate one sufficient condition for the block structure of X (C1..C7)
/// or Y (C1'..C7') relative to the given SVD of N.
///
/// Existential conditions search k (and ℓ) in 1..k_max and report the
/// smallest witness. The scalar c is recovered by least squares and must
/// satisfy |c| > tol; power conditions use a residual relative to the
/// candidate power so the verdict is scale-free.
template <typename Scalar>
ConditionVerdict<Scalar> check_condition(ConditionId id, const MatrixX<Scalar>& a,
                                         const SvdFactors<Scalar>& f,
                                         const ConditionSearch& search = {}) {
  if (search.k_max < 1) throw InvalidArgument("check_condition: k_max must be at least 1");
  const Side side = side_of(id);
  detail::require_side("check_condition", a, side == Side::x ? f.rows() : f.cols());
  const Tolerance tol = search.tol;
  const auto proj = projectors(f);

  if (side == Side::x) {
    const MatrixX<Scalar> gram = gram_left(f);  // N N*
    switch (ordinal(id)) {
      case 1:
        return detail::check_normal<Scalar>(id, gram * a, tol);
      case 2: {
        const MatrixX<Scalar> nn_pinv = range_projector(f);
        return detail::check_power<Scalar>(id, gram * a, 0, [&](int) { return nn_pinv; }, search);
      }
      case 3:
        return detail::check_power<Scalar>(
            id, gram * a, search.k_max,
            [&](int ell) {
              MatrixX<Scalar> p = gram;
              for (int i = 1; i < ell; ++i) p = (p * gram).eval();
              return p;
            },
            search);
      case 4:
        return detail::check_normal<Scalar>(id, a * proj.e_n, tol);
      case 5:
        return detail::check_power<Scalar>(id, a * proj.e_n, 0, [&](int) { return proj.e_n; },
                                           search);
      case 6: {
        ConditionVerdict<Scalar> v;
        v.id = id;
        const double scale = std::max(1.0, static_cast<double>(a.norm()));
        v.residual = (range_projector(f) * a * proj.e_n).norm() / scale;
        v.holds = v.residual <= tol.value;
        return v;
      }
      default: {
        ConditionVerdict<Scalar> v;
        v.id = id;
        v.residual = std::numeric_limits<double>::infinity();
        const MatrixX<Scalar> xe = a * proj.e_n;
        MatrixX<Scalar> power = gram;
        for (int k = 1; k <= search.k_max; ++k) {
          if (k > 1) power = (power * gram).eval();
          const double scale = static_cast<double>(power.norm() * a.norm());
          const double res = (power * xe).norm();
          const double rel = scale > 0 ? res / scale : 0.0;
          if (res <= tol.value * scale) {
            v.holds = true;
            v.residual = rel;
            v.witness = Witness<Scalar>{k, 0, std::nullopt};
            return v;
          }
          v.residual = std::min(v.residual, rel);
        }
        return v;
      }
    }
  }

  const MatrixX<Scalar> gram = gram_right(f);  // N* N
  switch (ordinal(id)) {
    case 1:
      return detail::check_normal<Scalar>(id, a * gram, tol);
    case 2: {
      const MatrixX<Scalar> pinv_n = corange_projector(f);
      return detail::check_power<Scalar>(id, a * gram, 0, [&](int) { return pinv_n; }, search);
    }
    case 3:
      return detail::check_power<Scalar>(
          id, a * gram, search.k_max,
          [&](int ell) {
            MatrixX<Scalar> p = gram;
            for (int i = 1; i < ell; ++i) p = (p * gram).eval();
            return p;
          },
          search);
    case 4:
      return detail::check_normal<Scalar>(id, proj.f_n * a, tol);
    case 5:
      return detail::check_power<Scalar>(id, proj.f_n * a, 0, [&](int) { return proj.f_n; },
                                         search);
    case 6: {
      ConditionVerdict<Scalar> v;
      v.id = id;
      const double scale = std::max(1.0, static_cast<double>(a.norm()));
      v.residual = (proj.f_n * a * corange_projector(f)).norm() / scale;
      v.holds = v.residual <= tol.value;
      return v;
    }
    default: {
      ConditionVerdict<Scalar> v;
      v.id = id;
      v.residual = std::numeric_limits<double>::infinity();
      const MatrixX<Scalar> fy = proj.f_n * a;
      MatrixX<Scalar> power = gram;
      for (int k = 1; k <= search.k_max; ++k) {
        if (k > 1) power = (power * gram).eval();
        const double scale = static_cast<double>(power.norm() * a.norm());
        const double res = (fy * power).norm();
        const double rel = scale > 0 ? res / scale : 0.0;
        if (res <= tol.value * scale) {
          v.holds = true;
          v.residual = rel;
          v.witness = Witness<Scalar>{k, 0, std::nullopt};
          return v;
        }
        v.residual = std::min(v.residual, rel);
      }
      return v;
    }
  }
}

/// verdict.holds ⇒ report.satisfied. Both must describe the same side.
template <typename Scalar>
bool implies_structure(const ConditionVerdict<Scalar>& verdict,
                       const StructureReport<Scalar>& report) {
  if (side_of(verdict.id) != report.side) {
    throw InvalidArgument("implies_structure: verdict " + to_string(verdict.id) +
                          " does not describe the " + std::string(to_string(report.side)) +
                          " side");
  }
  return !verdict.holds || report.satisfied;
}

}  // namespace mpx
