#include "mpx/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <map>
#include <ostream>

#include "mpx/generators.hpp"
#include "mpx/structured_pinv.hpp"

namespace mpx::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<BenchRecord> run_trial(const BenchConfig& cfg, int size, int trial) {
  const Shape s = shape_for(size);
  InstanceSpec spec;
  spec.m = s.m;
  spec.n = s.n;
  spec.r = s.r;
  spec.sigma_cond = cfg.sigma_cond;
  spec.flavor = Flavor::a1a2;
  spec.seed = trial_seed(cfg.seed, size, trial);
  const Instance inst = generate(spec);
  const ComplexMatrix m = inst.x * inst.n_matrix * inst.y;

  // Closed form: SVD of N plus the formula, hypothesis checks included.
  PinvOptions opts;
  opts.mode = HypothesisMode::permissive;
  opts.compute_residuals = false;
  auto start = Clock::now();
  const auto n_svd = svd(inst.n_matrix);
  const ComplexMatrix z = pinv_xny(inst.x, inst.n_matrix, inst.y, n_svd, opts).z;
  const double t_formula = seconds_since(start);

  start = Clock::now();
  const ComplexMatrix z_oracle = pinv_oracle(m);
  const double t_oracle = seconds_since(start);

  BenchRecord formula{"thm33", s.m, s.n, s.r, t_formula, penrose_residuals(m, z),
                      relative_distance(z, z_oracle)};
  BenchRecord oracle{"oracle", s.m, s.n, s.r, t_oracle, penrose_residuals(m, z_oracle), 0.0};
  return {formula, oracle};
}

}  // namespace

Shape shape_for(int size) {
  const int n = std::max(1, 3 * size / 4);
  return {size, n, n / 2};
}

std::uint64_t trial_seed(std::uint64_t base, int size, int trial) {
  // splitmix64 finalizer over (base, size, trial)
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(size) * 1000003ULL +
                                                    static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<BenchRecord> run(const BenchConfig& cfg) {
  struct Job {
    int size;
    int trial;
  };
  std::vector<Job> jobs;
  for (int size : cfg.sizes) {
    for (int t = 0; t < cfg.trials; ++t) jobs.push_back({size, t});
  }

  std::vector<std::vector<BenchRecord>> results(jobs.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, cfg.jobs));
  for (std::size_t begin = 0; begin < jobs.size(); begin += workers) {
    const std::size_t end = std::min(jobs.size(), begin + workers);
    std::vector<std::future<std::vector<BenchRecord>>> pending;
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                   run_trial, std::cref(cfg), jobs[i].size, jobs[i].trial));
    }
    for (std::size_t i = begin; i < end; ++i) results[i] = pending[i - begin].get();
  }

  std::vector<BenchRecord> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<SizeSummary> summarize(const std::vector<BenchRecord>& records) {
  std::map<std::pair<int, std::string>, std::pair<SizeSummary, int>> acc;
  for (const auto& r : records) {
    auto& [sum, count] = acc[{r.m, r.method}];
    sum.method = r.method;
    sum.size = r.m;
    sum.mean_wall_time_s += r.wall_time_s;
    sum.max_oracle_distance = std::max(sum.max_oracle_distance, r.oracle_distance);
    ++count;
  }
  std::vector<SizeSummary> out;
  for (auto& [key, entry] : acc) {
    entry.first.mean_wall_time_s /= entry.second;
    out.push_back(entry.first);
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kCsvHeader << "\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.9g,%.6e,%.6e,%.6e,%.6e,%.6e\n",
                  r.method.c_str(), r.m, r.n, r.r, r.wall_time_s, r.residuals.r_a, r.residuals.r_b,
                  r.residuals.r_c, r.residuals.r_d, r.oracle_distance);
    out << buf;
  }
}

}  // namespace mpx::bench
