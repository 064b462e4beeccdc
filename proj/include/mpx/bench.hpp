#pragma once

// Timing comparison of the closed-form (XNY)† against the SVD oracle on
// freshly generated instances.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpx/decomp.hpp"

namespace mpx::bench {

struct BenchRecord {
  std::string method;
  int m = 0;
  int n = 0;
  int r = 0;
  double wall_time_s = 0;
  PenroseResiduals residuals;
  double oracle_distance = 0;
};

struct BenchConfig {
  std::vector<int> sizes;
  int trials = 1;
  std::uint64_t seed = 42;
  double sigma_cond = 100.0;
  int jobs = 1;
};

struct SizeSummary {
  std::string method;
  int size = 0;
  double mean_wall_time_s = 0;
  double max_oracle_distance = 0;
};

inline constexpr const char* kCsvHeader =
    "method,m,n,r,wall_time_s,res_a,res_b,res_c,res_d,oracle_distance";

/// Instance shape used for a bench size s: m = s, n = max(1, 3s/4), r = n/2.
struct Shape {
  int m, n, r;
};
Shape shape_for(int size);

/// Seed of trial `trial` at size `size`; independent of job scheduling.
std::uint64_t trial_seed(std::uint64_t base, int size, int trial);

/// Records in (size, trial, method) order; thm33 precedes oracle per trial.
std::vector<BenchRecord> run(const BenchConfig& cfg);

std::vector<SizeSummary> summarize(const std::vector<BenchRecord>& records);

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace mpx::bench
