#include "mpx/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace mpx::io {

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_double(const std::string& tok, double& out) {
  errno = 0;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end != tok.c_str() && *end == '\0';
}

bool parse_dim(const std::string& tok, long& out) {
  char* end = nullptr;
  out = std::strtol(tok.c_str(), &end, 10);
  return end != tok.c_str() && *end == '\0';
}

[[noreturn]] void fail(ParseError::Kind kind, int line, const std::string& msg) {
  throw ParseError(kind, line, msg);
}

void check_header(const std::string& line) {
  const auto t = tokens(line);
  if (t.empty() || t[0] != "%%MatrixMarket") {
    fail(ParseError::Kind::malformed_header, 1, "missing %%MatrixMarket banner");
  }
  if (t.size() != 5) {
    fail(ParseError::Kind::malformed_header, 1,
         "banner must read '%%MatrixMarket matrix array complex general'");
  }
  const std::string object = lower(t[1]);
  const std::string format = lower(t[2]);
  const std::string field = lower(t[3]);
  const std::string symmetry = lower(t[4]);
  if (object != "matrix") fail(ParseError::Kind::unsupported_format, 1, "unsupported object '" + t[1] + "'");
  if (format != "array") fail(ParseError::Kind::unsupported_format, 1, "unsupported format '" + t[2] + "'");
  if (field != "complex") fail(ParseError::Kind::unsupported_format, 1, "unsupported field '" + t[3] + "'");
  if (symmetry != "general") {
    fail(ParseError::Kind::unsupported_format, 1, "unsupported symmetry '" + t[4] + "'");
  }
}

}  // namespace

ParseError::ParseError(Kind kind, int line, const std::string& msg)
    : Error("line " + std::to_string(line) + ": " + msg), kind_(kind), line_(line) {}

ComplexMatrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ParseError::Kind::malformed_header, 1, "empty input");
  check_header(line);

  int lineno = 1;
  long rows = -1;
  long cols = -1;
  ComplexMatrix a;
  long filled = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = tokens(line);
    if (t.empty() || t[0].starts_with("%")) continue;
    if (rows < 0) {
      if (t.size() != 2 || !parse_dim(t[0], rows) || !parse_dim(t[1], cols) || rows < 1 || cols < 1) {
        fail(ParseError::Kind::malformed_header, lineno, "expected dimensions line 'm n' with m, n >= 1");
      }
      a.resize(rows, cols);
      continue;
    }
    if (t.size() != 2) {
      fail(ParseError::Kind::bad_entry, lineno,
           "expected 're im', got " + std::to_string(t.size()) + " token(s)");
    }
    double re = 0;
    double im = 0;
    if (!parse_double(t[0], re) || !parse_double(t[1], im)) {
      fail(ParseError::Kind::bad_entry, lineno, "entry is not a pair of numbers");
    }
    if (!std::isfinite(re) || !std::isfinite(im)) {
      fail(ParseError::Kind::non_finite, lineno, "non-finite entry");
    }
    if (filled >= rows * cols) {
      fail(ParseError::Kind::dimension_mismatch, lineno,
           "more than " + std::to_string(rows * cols) + " entries");
    }
    // Column-major entry order.
    a(filled % rows, filled / rows) = Complex(re, im);
    ++filled;
  }
  if (rows < 0) fail(ParseError::Kind::malformed_header, lineno, "missing dimensions line");
  if (filled != rows * cols) {
    fail(ParseError::Kind::dimension_mismatch, lineno,
         "expected " + std::to_string(rows * cols) + " entries, found " + std::to_string(filled));
  }
  return a;
}

ComplexMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_matrix(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), e.line(), path.string() + ": " + e.what());
  }
}

std::string format_matrix(const ComplexMatrix& a) {
  std::string out = "%%MatrixMarket matrix array complex general\n";
  out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
  char buf[64];
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", a(i, j).real(), a(i, j).imag());
      out += buf;
    }
  }
  return out;
}

void write_matrix(const std::filesystem::path& path, const ComplexMatrix& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_matrix(a);
  if (!out) throw IoError("write failed for " + path.string());
}

void write_spec(const std::filesystem::path& path, const InstanceSpec& spec) {
  const nlohmann::json j = {{"m", spec.m},
                            {"n", spec.n},
                            {"r", spec.r},
                            {"sigma_cond", spec.sigma_cond},
                            {"flavor", flavor_name(spec)},
                            {"seed", spec.seed}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

InstanceSpec read_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    InstanceSpec s;
    s.m = j.at("m").get<int>();
    s.n = j.at("n").get<int>();
    s.r = j.at("r").get<int>();
    s.sigma_cond = j.at("sigma_cond").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (!parse_flavor(j.at("flavor").get<std::string>(), s)) {
      throw IoError(path.string() + ": unknown flavor");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace mpx::io
