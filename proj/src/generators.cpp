#include "mpx/generators.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

namespace mpx {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Largest κ(X), κ(Y) accepted for the violate flavors before redrawing.
constexpr double kMaxCondition = 1e4;
constexpr int kMaxRedraws = 64;

double log_uniform(Rng& rng, double lo, double hi) {
  return lo * std::pow(hi / lo, rng.uniform());
}

Complex unit_phase(Rng& rng) { return std::polar(1.0, kTwoPi * rng.uniform()); }

// Random complex scalar with modulus in [0.5, 2].
Complex moderate_scalar(Rng& rng) { return log_uniform(rng, 0.5, 2.0) * unit_phase(rng); }

// W D W* with D diagonal complex, |d| in [0.5, 2].
ComplexMatrix random_normal(Eigen::Index dim, Rng& rng) {
  const ComplexMatrix w = haar_unitary(dim, rng);
  ComplexMatrix d = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) d(i, i) = moderate_scalar(rng);
  return w * d * w.adjoint();
}

// W diag(±s) W* with s in [0.5, 2].
ComplexMatrix random_hermitian_nonsingular(Eigen::Index dim, Rng& rng) {
  const ComplexMatrix w = haar_unitary(dim, rng);
  ComplexMatrix d = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double s = log_uniform(rng, 0.5, 2.0);
    d(i, i) = rng.uniform() < 0.5 ? -s : s;
  }
  return w * d * w.adjoint();
}

// ω W diag(ζ_j) W* with ζ_j k-th roots of unity, so the k-th power is ω^k I.
ComplexMatrix random_root_of_scalar(Eigen::Index dim, int k, Rng& rng) {
  const Complex omega = moderate_scalar(rng);
  const ComplexMatrix w = haar_unitary(dim, rng);
  ComplexMatrix d = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto j = static_cast<double>(rng.next() % static_cast<std::uint64_t>(k));
    d(i, i) = omega * std::polar(1.0, kTwoPi * j / k);
  }
  return w * d * w.adjoint();
}

// a Σ^{2ℓ/k − 2} Z with Z a diagonal of k-th roots of unity, so that
// (Σ² X1)^k = a^k Σ^{2ℓ}.
ComplexMatrix power_matched_block(const std::vector<double>& sigma, Eigen::Index r, int k,
                                  int ell, Rng& rng) {
  const Complex a = moderate_scalar(rng);
  ComplexMatrix d = ComplexMatrix::Zero(r, r);
  const double exponent = 2.0 * ell / k - 2.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto j = static_cast<double>(rng.next() % static_cast<std::uint64_t>(k));
    d(i, i) = a * std::pow(sigma[static_cast<std::size_t>(i)], exponent) *
              std::polar(1.0, kTwoPi * j / k);
  }
  return d;
}

ComplexMatrix sigma_power(const std::vector<double>& sigma, Eigen::Index r, double p) {
  ComplexMatrix d = ComplexMatrix::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i) d(i, i) = std::pow(sigma[static_cast<std::size_t>(i)], p);
  return d;
}

int small_int(Rng& rng, int hi) { return 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi)); }

double condition_number(const ComplexMatrix& a) {
  if (a.rows() == 0) return 1.0;
  const auto f = svd(a);
  const double lo = f.sigma.back();
  return lo > 0 ? f.sigma.front() / lo : std::numeric_limits<double>::infinity();
}

// Scale a Gaussian block so its Frobenius norm is `target`.
ComplexMatrix gaussian_with_norm(Eigen::Index rows, Eigen::Index cols, double target, Rng& rng) {
  ComplexMatrix g = gaussian_matrix(rows, cols, rng);
  const double nrm = g.norm();
  if (nrm > 0) g *= target / nrm;
  return g;
}

void validate(const InstanceSpec& s) {
  std::ostringstream why;
  if (s.m < 1 || s.n < 1) {
    why << "dimensions must be positive (m=" << s.m << ", n=" << s.n << ")";
  } else if (s.r < 0 || s.r > std::min(s.m, s.n)) {
    why << "rank r=" << s.r << " outside [0, min(m, n)=" << std::min(s.m, s.n) << "]";
  } else if (!(s.sigma_cond >= 1.0) || !std::isfinite(s.sigma_cond)) {
    why << "sigma_cond must be a finite number >= 1 (got " << s.sigma_cond << ")";
  } else if (s.flavor == Flavor::condition && !s.condition) {
    why << "condition flavor requires a condition id";
  } else {
    return;
  }
  throw InfeasibleSpecError("infeasible instance spec: " + why.str());
}

}  // namespace

std::string_view to_string(Flavor f) {
  switch (f) {
    case Flavor::a1a2: return "a1a2";
    case Flavor::hermitian_fix: return "hermitian_fix";
    case Flavor::projector_fix: return "projector_fix";
    case Flavor::condition: return "condition";
    case Flavor::violate_a1: return "violate_a1";
    case Flavor::violate_a2: return "violate_a2";
  }
  return "unknown";
}

std::string flavor_name(const InstanceSpec& spec) {
  std::string s(to_string(spec.flavor));
  if (spec.flavor == Flavor::condition && spec.condition) s += ":" + to_string(*spec.condition);
  return s;
}

bool parse_flavor(std::string_view text, InstanceSpec& spec) {
  constexpr std::string_view prefix = "condition:";
  if (text.starts_with(prefix)) {
    const auto id = parse_condition(text.substr(prefix.size()));
    if (!id) return false;
    spec.flavor = Flavor::condition;
    spec.condition = id;
    return true;
  }
  for (Flavor f : {Flavor::a1a2, Flavor::hermitian_fix, Flavor::projector_fix, Flavor::violate_a1,
                   Flavor::violate_a2}) {
    if (text == to_string(f)) {
      spec.flavor = f;
      spec.condition.reset();
      return true;
    }
  }
  return false;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(kTwoPi * u2);
  return radius * std::cos(kTwoPi * u2);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2, im * std::numbers::sqrt2 / 2};
}

ComplexMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  ComplexMatrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
  }
  return g;
}

ComplexMatrix haar_unitary(Eigen::Index dim, Rng& rng) {
  const ComplexMatrix g = gaussian_matrix(dim, dim, rng);
  const Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const auto& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex d = packed(j, j);
    const double mag = std::abs(d);
    q.col(j) *= mag > 0 ? d / mag : Complex(1.0);
  }
  return q;
}

ComplexMatrix haar_unitary(Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return haar_unitary(dim, rng);
}

ComplexMatrix random_nonsingular(Eigen::Index dim, Rng& rng, double lo, double hi) {
  const ComplexMatrix q1 = haar_unitary(dim, rng);
  const ComplexMatrix q2 = haar_unitary(dim, rng);
  Eigen::VectorXcd s(dim);
  for (Eigen::Index i = 0; i < dim; ++i) s(i) = log_uniform(rng, lo, hi);
  return q1 * s.asDiagonal() * q2;
}

std::vector<double> planted_spectrum(int min_dim, int r, double cond, Rng& rng) {
  std::vector<double> sigma(static_cast<std::size_t>(min_dim), 0.0);
  if (r == 0) return sigma;
  sigma[0] = 1.0;
  if (r == 1) return sigma;
  sigma[static_cast<std::size_t>(r - 1)] = 1.0 / cond;
  std::vector<double> interior;
  for (int i = 1; i + 1 < r; ++i) interior.push_back(std::pow(cond, -rng.uniform()));
  std::sort(interior.begin(), interior.end(), std::greater<>());
  std::copy(interior.begin(), interior.end(), sigma.begin() + 1);
  return sigma;
}

ComplexMatrix from_factors(const SvdFactors<Complex>& f) {
  const auto k = static_cast<Eigen::Index>(f.sigma.size());
  Eigen::VectorXcd s(k);
  for (Eigen::Index i = 0; i < k; ++i) s(i) = f.sigma[static_cast<std::size_t>(i)];
  return f.u.leftCols(k) * s.asDiagonal() * f.v.leftCols(k).adjoint();
}

Instance generate(const InstanceSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const Eigen::Index m = spec.m;
  const Eigen::Index n = spec.n;
  const Eigen::Index r = spec.r;

  Instance inst;
  inst.spec = spec;
  auto& f = inst.n_svd_true;
  f.u = haar_unitary(m, rng);
  f.v = haar_unitary(n, rng);
  f.sigma = planted_spectrum(std::min(spec.m, spec.n), spec.r, spec.sigma_cond, rng);
  f.rank = r;
  f.rank_tol = default_rank_tol(m, n, f.sigma.empty() ? 0.0 : f.sigma.front());
  inst.n_matrix = from_factors(f);

  // Blocks in the singular bases: X side split (r, m−r), Y side (r, n−r).
  Blocks<Complex> xb{random_nonsingular(r, rng), ComplexMatrix::Zero(r, m - r),
                     gaussian_matrix(m - r, r, rng) / std::sqrt(double(std::max<Eigen::Index>(m, 1))),
                     random_nonsingular(m - r, rng)};
  Blocks<Complex> yb{random_nonsingular(r, rng),
                     gaussian_matrix(r, n - r, rng) / std::sqrt(double(std::max<Eigen::Index>(n, 1))),
                     ComplexMatrix::Zero(n - r, r), random_nonsingular(n - r, rng)};

  switch (spec.flavor) {
    case Flavor::a1a2:
      break;
    case Flavor::hermitian_fix:
      xb.bottom_right = random_hermitian_nonsingular(m - r, rng);
      yb.bottom_right = random_hermitian_nonsingular(n - r, rng);
      break;
    case Flavor::projector_fix:
      xb.bottom_right = ComplexMatrix::Identity(m - r, m - r);
      yb.bottom_right = ComplexMatrix::Identity(n - r, n - r);
      break;
    case Flavor::condition: {
      const ConditionId id = *spec.condition;
      Blocks<Complex>& b = side_of(id) == Side::x ? xb : yb;
      const ComplexMatrix inv_sigma2 = sigma_power(f.sigma, r, -2.0);
      const Eigen::Index tail = (side_of(id) == Side::x ? m : n) - r;
      const bool left = side_of(id) == Side::x;
      switch (ordinal(id)) {
        case 1: {  // Σ²X1 (resp. Y1Σ²) normal
          const ComplexMatrix g = random_normal(r, rng);
          b.top_left = left ? ComplexMatrix(inv_sigma2 * g) : ComplexMatrix(g * inv_sigma2);
          break;
        }
        case 2: {  // (Σ²X1)^k = ω^k I
          const ComplexMatrix g = random_root_of_scalar(r, small_int(rng, 3), rng);
          b.top_left = left ? ComplexMatrix(inv_sigma2 * g) : ComplexMatrix(g * inv_sigma2);
          break;
        }
        case 3: {  // (Σ²X1)^k = a^k Σ^{2ℓ}
          const int k = small_int(rng, 3);
          const int ell = small_int(rng, 3);
          b.top_left = power_matched_block(f.sigma, r, k, ell, rng);
          break;
        }
        case 4:  // X4 (resp. Y4) normal
          b.bottom_right = random_normal(tail, rng);
          break;
        case 5:  // X4^k = ω^k I
          b.bottom_right = random_root_of_scalar(tail, small_int(rng, 3), rng);
          break;
        default:  // C6, C7: the zero off-block itself
          break;
      }
      break;
    }
    case Flavor::violate_a1:
    case Flavor::violate_a2: {
      const bool x_side = spec.flavor == Flavor::violate_a1;
      Blocks<Complex>& b = x_side ? xb : yb;
      ComplexMatrix& off = x_side ? b.top_right : b.bottom_left;
      if (off.size() == 0) {
        inst.warning = InstanceWarning::violation_vacuous;
        break;
      }
      const double rest = std::sqrt(b.top_left.squaredNorm() + b.bottom_right.squaredNorm() +
                                    (x_side ? b.bottom_left : b.top_right).squaredNorm());
      const double target = 0.5 * std::max(rest, 1.0);
      for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        off = gaussian_with_norm(off.rows(), off.cols(), target, rng);
        if (condition_number(block_assemble(b)) <= kMaxCondition) break;
      }
      inst.planted_off_block_norm = off.norm();
      break;
    }
  }

  inst.x = f.u * block_assemble(xb) * f.u.adjoint();
  inst.y = f.v * block_assemble(yb) * f.v.adjoint();
  return inst;
}

std::uint64_t default_seed(std::uint64_t fallback) {
  if (const char* env = std::getenv("MPX_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
  }
  return fallback;
}

}  // namespace mpx
