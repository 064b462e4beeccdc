#include "mpx/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mpx/bench.hpp"
#include "mpx/generators.hpp"
#include "mpx/io.hpp"
#include "mpx/structure.hpp"
#include "mpx/structured_pinv.hpp"

namespace mpx::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : Error {
  using Error::Error;
};

struct PinvArgs {
  std::string n_path;
  std::string x_path;
  std::string y_path;
  std::string method = "thm33";
  double tol = kStructureTol;
  bool strict = true;
  std::string out_path;
  std::string report_path;
  bool verify = false;
  std::vector<int> split;
};

struct CheckArgs {
  std::string n_path;
  std::string x_path;
  std::string y_path;
  std::vector<std::string> conditions;
  int k_max = 8;
  double tol = kStructureTol;
};

struct GenArgs {
  int m = 0;
  int n = 0;
  int r = 0;
  double cond = 10.0;
  std::string flavor = "a1a2";
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

struct BenchArgs {
  std::vector<int> sizes;
  int trials = 3;
  std::optional<std::uint64_t> seed;
  std::string csv_path;
  double cond = 100.0;
  int jobs = 1;
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(6) << v;
  return os.str();
}

std::string complex_str(const Complex& c) {
  std::ostringstream os;
  os << std::setprecision(12) << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i";
  return os.str();
}

void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw io::IoError("cannot write " + path);
  f << text;
}

int cmd_pinv(const PinvArgs& a, std::ostream& out) {
  const auto method = parse_method(a.method);
  if (!method) throw UsageError("unknown method '" + a.method + "'");
  if (*method == Method::thm31_xn && !a.y_path.empty()) {
    throw UsageError("thm31-xn computes (XN)+ and takes no --y");
  }
  if (*method == Method::thm31_ny && !a.x_path.empty()) {
    throw UsageError("thm31-ny computes (NY)+ and takes no --x");
  }

  const ComplexMatrix n = io::read_matrix(a.n_path);
  const ComplexMatrix x =
      a.x_path.empty() ? ComplexMatrix(ComplexMatrix::Identity(n.rows(), n.rows())) : io::read_matrix(a.x_path);
  const ComplexMatrix y =
      a.y_path.empty() ? ComplexMatrix(ComplexMatrix::Identity(n.cols(), n.cols())) : io::read_matrix(a.y_path);
  if (x.rows() != n.rows() || x.cols() != n.rows()) {
    throw DimensionError("X must be " + std::to_string(n.rows()) + "x" + std::to_string(n.rows()));
  }
  if (y.rows() != n.cols() || y.cols() != n.cols()) {
    throw DimensionError("Y must be " + std::to_string(n.cols()) + "x" + std::to_string(n.cols()));
  }

  PinvOptions opts;
  opts.tol = Tolerance{a.tol};
  opts.mode = a.strict ? HypothesisMode::strict : HypothesisMode::permissive;

  const auto n_svd = svd(n);
  ComplexMatrix source;
  PinvResult<Complex> result;
  switch (*method) {
    case Method::oracle:
      source = x * n * y;
      result = pinv_oracle_result(source);
      break;
    case Method::lemma21: {
      source = x * n * y;
      Eigen::Index p = 0;
      Eigen::Index q = 0;
      if (a.split.empty()) {
        p = q = svd(source).rank;
      } else if (a.split.size() == 2) {
        p = a.split[0];
        q = a.split[1];
      } else {
        throw UsageError("--split expects P,Q");
      }
      const auto b = block_split<Complex>(source, p, q);
      result = pinv_block<Complex>(b.top_left, b.bottom_left, b.top_right, b.bottom_right, opts);
      break;
    }
    case Method::thm31_xn:
      source = x * n;
      result = pinv_xn(x, n, n_svd, opts);
      break;
    case Method::thm31_ny:
      source = n * y;
      result = pinv_ny(n, y, n_svd, opts);
      break;
    case Method::thm33:
      source = x * n * y;
      result = pinv_xny(x, n, y, n_svd, opts);
      break;
    case Method::cor34:
      source = x * n * y;
      result = pinv_xny_hermitian(x, n, y, n_svd, opts);
      break;
    case Method::cgms11:
      source = x * n * y;
      result = pinv_xny_baseline(x, n, y, n_svd, opts);
      break;
  }

  std::ostringstream rep;
  rep << "method: " << to_string(result.method) << "\n";
  rep << "rows: " << source.rows() << "\n";
  rep << "cols: " << source.cols() << "\n";
  rep << "rank_n: " << n_svd.rank << "\n";
  rep << "mode: " << (a.strict ? "strict" : "permissive") << "\n";
  for (const auto& h : result.hypothesis_checks) {
    rep << "hypothesis: " << (h.passed ? "pass" : "fail") << " " << sci(h.residual) << " "
        << h.name << "\n";
  }
  rep << "res_a: " << sci(result.residuals.r_a) << "\n";
  rep << "res_b: " << sci(result.residuals.r_b) << "\n";
  rep << "res_c: " << sci(result.residuals.r_c) << "\n";
  rep << "res_d: " << sci(result.residuals.r_d) << "\n";
  if (a.verify) {
    rep << "oracle_distance: " << sci(relative_distance(result.z, pinv_oracle(source))) << "\n";
  }

  if (!a.out_path.empty()) io::write_matrix(a.out_path, result.z);
  emit(a.report_path, rep.str(), out);
  return kOk;
}

int cmd_check(const CheckArgs& a, std::ostream& out) {
  if (a.x_path.empty() == a.y_path.empty()) throw UsageError("give exactly one of --x or --y");
  if (a.k_max < 1) throw UsageError("--k-max must be at least 1");
  const Side side = a.x_path.empty() ? Side::y : Side::x;

  std::vector<ConditionId> ids;
  if (a.conditions.empty()) {
    for (ConditionId id : kAllConditions) {
      if (side_of(id) == side) ids.push_back(id);
    }
  } else {
    for (const auto& text : a.conditions) {
      const auto id = parse_condition(text);
      if (!id) throw UsageError("unknown condition '" + text + "'");
      if (side_of(*id) != side) {
        throw UsageError("condition " + to_string(*id) + " does not apply to the " +
                         std::string(to_string(side)) + " side");
      }
      ids.push_back(*id);
    }
  }

  const ComplexMatrix n = io::read_matrix(a.n_path);
  const ComplexMatrix mat = io::read_matrix(side == Side::x ? a.x_path : a.y_path);
  const auto n_svd = svd(n);
  const ConditionSearch search{a.k_max, Tolerance{a.tol}};

  for (ConditionId id : ids) {
    const auto v = check_condition(id, mat, n_svd, search);
    out << "condition: " << to_string(id) << " holds=" << (v.holds ? "true" : "false")
        << " residual=" << sci(v.residual);
    if (v.witness) {
      out << " k=" << v.witness->k;
      if (v.witness->ell > 0) out << " ell=" << v.witness->ell;
      if (v.witness->c) out << " c=" << complex_str(*v.witness->c);
    }
    out << "\n";
  }
  const auto rep = side == Side::x ? structure_report_x(mat, n_svd, Tolerance{a.tol})
                                   : structure_report_y(mat, n_svd, Tolerance{a.tol});
  out << "structure: side=" << to_string(side) << " rank=" << n_svd.rank
      << " off_block_norm=" << sci(rep.off_block_norm)
      << " satisfied=" << (rep.satisfied ? "true" : "false") << "\n";
  return kOk;
}

int cmd_gen(const GenArgs& a, std::ostream& out, std::ostream& err) {
  InstanceSpec spec;
  spec.m = a.m;
  spec.n = a.n;
  spec.r = a.r;
  spec.sigma_cond = a.cond;
  spec.seed = a.seed.value_or(default_seed());
  if (!parse_flavor(a.flavor, spec)) throw UsageError("unknown flavor '" + a.flavor + "'");

  Instance inst;
  try {
    inst = generate(spec);
  } catch (const InfeasibleSpecError& e) {
    err << "mpx gen: " << e.what() << "\n";
    return kInfeasible;
  }
  if (inst.warning == InstanceWarning::violation_vacuous) {
    err << "mpx gen: infeasible spec: flavor " << flavor_name(spec)
        << " needs a nonempty off-diagonal block, but r=" << spec.r << " leaves it empty\n";
    return kInfeasible;
  }

  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io::IoError("cannot create " + dir.string() + ": " + ec.message());
  io::write_matrix(dir / "N.mtx", inst.n_matrix);
  io::write_matrix(dir / "X.mtx", inst.x);
  io::write_matrix(dir / "Y.mtx", inst.y);
  io::write_spec(dir / "spec.json", spec);
  out << "wrote N.mtx X.mtx Y.mtx spec.json to " << dir.string() << " (flavor "
      << flavor_name(spec) << ", seed " << spec.seed << ")\n";
  return kOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.trials < 1) throw UsageError("--trials must be at least 1");
  if (a.sizes.empty()) throw UsageError("--sizes must name at least one size");
  for (int s : a.sizes) {
    if (s < 1) throw UsageError("sizes must be positive");
  }
  bench::BenchConfig cfg;
  cfg.sizes = a.sizes;
  cfg.trials = a.trials;
  cfg.seed = a.seed.value_or(default_seed());
  cfg.sigma_cond = a.cond;
  cfg.jobs = a.jobs;
  const auto records = bench::run(cfg);

  std::ostream& summary = a.csv_path.empty() ? err : out;
  if (a.csv_path.empty()) {
    bench::write_csv(out, records);
  } else {
    std::ofstream f(a.csv_path);
    if (!f) throw io::IoError("cannot write " + a.csv_path);
    bench::write_csv(f, records);
  }
  for (const auto& s : bench::summarize(records)) {
    summary << "summary: method=" << s.method << " size=" << s.size
            << " mean_wall_time_s=" << sci(s.mean_wall_time_s)
            << " max_oracle_distance=" << sci(s.max_oracle_distance) << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moore-Penrose inverses of structured products X N Y", "mpx"};
  app.require_subcommand(1);

  PinvArgs pa;
  auto* pinv = app.add_subcommand("pinv", "compute a pseudo-inverse by a chosen method");
  pinv->add_option("--n", pa.n_path, "N matrix (Matrix Market)")->required();
  pinv->add_option("--x", pa.x_path, "X matrix (default identity)");
  pinv->add_option("--y", pa.y_path, "Y matrix (default identity)");
  pinv->add_option("--method", pa.method, "oracle|lemma21|thm31-xn|thm31-ny|thm33|cor34|cgms11")
      ->capture_default_str();
  pinv->add_option("--tol", pa.tol, "relative hypothesis tolerance")->capture_default_str();
  pinv->add_flag("--strict,!--permissive", pa.strict, "fail (exit 2) on hypothesis violation");
  pinv->add_option("--out", pa.out_path, "write the pseudo-inverse here");
  pinv->add_option("--report", pa.report_path, "write the report here (default stdout)");
  pinv->add_flag("--verify", pa.verify, "compare against the SVD oracle");
  pinv->add_option("--split", pa.split, "lemma21 block cut P,Q (default rank)")->delimiter(',');

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "evaluate block-structure conditions");
  check->add_option("--n", ca.n_path, "N matrix")->required();
  check->add_option("--x", ca.x_path, "X matrix (conditions C1..C7)");
  check->add_option("--y", ca.y_path, "Y matrix (conditions C1'..C7')");
  check->add_option("--conditions", ca.conditions, "comma-separated ids, e.g. C1,C6")
      ->delimiter(',');
  check->add_option("--k-max", ca.k_max, "largest power searched")->capture_default_str();
  check->add_option("--tol", ca.tol, "relative tolerance")->capture_default_str();

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "generate a seeded test instance");
  gen->add_option("--m", ga.m, "rows of N")->required();
  gen->add_option("--n", ga.n, "columns of N")->required();
  gen->add_option("--r", ga.r, "rank of N")->required();
  gen->add_option("--cond", ga.cond, "sigma_1 / sigma_r")->capture_default_str();
  gen->add_option("--flavor", ga.flavor,
                  "a1a2|hermitian_fix|projector_fix|violate_a1|violate_a2|condition:<id>")
      ->capture_default_str();
  gen->add_option("--seed", ga.seed, "seed (default $MPX_SEED or 42)");
  gen->add_option("--out-dir", ga.out_dir, "output directory")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "time the closed form against the SVD oracle");
  bench->add_option("--sizes", ba.sizes, "comma-separated sizes")->delimiter(',')->required();
  bench->add_option("--trials", ba.trials, "trials per size")->capture_default_str();
  bench->add_option("--seed", ba.seed, "seed (default $MPX_SEED or 42)");
  bench->add_option("--csv", ba.csv_path, "CSV output (default stdout)");
  bench->add_option("--cond", ba.cond, "sigma_1 / sigma_r of N")->capture_default_str();
  bench->add_option("--jobs", ba.jobs, "parallel workers")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*pinv) return cmd_pinv(pa, out);
    if (*check) return cmd_check(ca, out);
    if (*gen) return cmd_gen(ga, out, err);
    return cmd_bench(ba, out, err);
  } catch (const UsageError& e) {
    err << "mpx: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const HypothesisError& e) {
    err << "mpx: " << e.what() << "\n";
    return kHypothesis;
  } catch (const SingularMatrixError& e) {
    err << "mpx: nonsingularity hypothesis violated: " << e.what() << "\n";
    return kHypothesis;
  } catch (const Error& e) {
    err << "mpx: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace mpx::cli
