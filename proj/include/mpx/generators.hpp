#pragma once

// Seeded, reproducible construction of test instances (N with known SVD and
// X, Y with prescribed block structure in the singular bases of N).
//
// Random numbers come from std::mt19937_64 seeded with the instance seed.
// Uniform doubles take the top 53 bits of one 64-bit draw; standard normals
// use the Box-Muller transform on two uniforms, so instance streams are
// identical across standard libraries.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mpx/decomp.hpp"
#include "mpx/matrix.hpp"
#include "mpx/structure.hpp"

namespace mpx {

enum class Flavor {
  a1a2,           // U*XU block lower triangular, V*YV block upper triangular
  hermitian_fix,  // X E_N and F_N Y Hermitian
  projector_fix,  // X E_N = E_N and F_N Y = F_N
  condition,      // plants one of C1..C7 / C1'..C7'
  violate_a1,     // full-norm X3 block
  violate_a2,     // full-norm lower-left block of V*YV
};

std::string_view to_string(Flavor f);

struct InstanceSpec {
  int m = 1;
  int n = 1;
  int r = 0;
  double sigma_cond = 1.0;  // σ₁ / σ_r
  Flavor flavor = Flavor::a1a2;
  std::optional<ConditionId> condition;  // required for Flavor::condition
  std::uint64_t seed = 0;
};

/// Flavor name as accepted on the command line: "a1a2", "hermitian_fix",
/// "projector_fix", "violate_a1", "violate_a2", or "condition:C3" /
/// "condition:C3'" / "condition:C3p".
std::string flavor_name(const InstanceSpec& spec);
bool parse_flavor(std::string_view text, InstanceSpec& spec);

/// Raised for specs that cannot describe any instance (r > min(m, n), etc.).
class InfeasibleSpecError : public Error {
 public:
  using Error::Error;
};

enum class InstanceWarning {
  none,
  violation_vacuous,  // the targeted off-block is empty for this rank
};

struct Instance {
  ComplexMatrix n_matrix;
  SvdFactors<Complex> n_svd_true;
  ComplexMatrix x;
  ComplexMatrix y;
  InstanceSpec spec;
  double planted_off_block_norm = 0;  // violate flavors only
  InstanceWarning warning = InstanceWarning::none;
};

/// Portable random source shared by every generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double normal();
  Complex complex_normal();  // E|z|² = 1
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

ComplexMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-distributed unitary: QR of a complex Gaussian with the diagonal
/// phases of R moved into Q.
ComplexMatrix haar_unitary(Eigen::Index dim, Rng& rng);
ComplexMatrix haar_unitary(Eigen::Index dim, std::uint64_t seed);

/// Q₁ diag(s) Q₂ with singular values s log-uniform in [lo, hi].
ComplexMatrix random_nonsingular(Eigen::Index dim, Rng& rng, double lo = 0.1, double hi = 10.0);

/// σ₁ = 1, σ_r = 1/cond, interior log-uniform, zeros after r.
std::vector<double> planted_spectrum(int min_dim, int r, double cond, Rng& rng);

/// U diag(sigma) V*.
ComplexMatrix from_factors(const SvdFactors<Complex>& f);

Instance generate(const InstanceSpec& spec);

/// Default seed: the MPX_SEED environment variable when set, else fallback.
std::uint64_t default_seed(std::uint64_t fallback = 42);

}  // namespace mpx
