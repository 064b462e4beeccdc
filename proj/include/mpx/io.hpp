#pragma once

// Matrix Market I/O for dense complex matrices ("array complex general",
// entries in column-major order, one "re im" pair per line) and the JSON
// sidecar that records how a fixture was generated.

#include <filesystem>
#include <string>

#include "mpx/errors.hpp"
#include "mpx/generators.hpp"
#include "mpx/matrix.hpp"

namespace mpx::io {

class ParseError : public Error {
 public:
  enum class Kind { malformed_header, unsupported_format, dimension_mismatch, non_finite, bad_entry };

  ParseError(Kind kind, int line, const std::string& msg);

  Kind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }

 private:
  Kind kind_;
  int line_;
};

/// Errors opening, reading or writing files.
class IoError : public Error {
 public:
  using Error::Error;
};

ComplexMatrix read_matrix(const std::filesystem::path& path);
ComplexMatrix parse_matrix(const std::string& text);

void write_matrix(const std::filesystem::path& path, const ComplexMatrix& a);
std::string format_matrix(const ComplexMatrix& a);

void write_spec(const std::filesystem::path& path, const InstanceSpec& spec);
InstanceSpec read_spec(const std::filesystem::path& path);

}  // namespace mpx::io
