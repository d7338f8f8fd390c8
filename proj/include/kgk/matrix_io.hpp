#pragma once

// Plain-text matrix format: one row per line, entries separated by
// whitespace, each entry written "a+bi" (a bare real "a" or imaginary "bi"
// is also accepted on input). Blank lines and lines starting with '#' are
// ignored.

#include "kgk/pencil.hpp"

#include <iosfwd>
#include <string>

namespace kgk {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

cplx parse_complex(const std::string& token);
std::string format_complex(cplx value);

/// Round-trip exact formatting of a double (17 significant digits).
std::string format_double(double value);

Eigen::MatrixXcd read_matrix(std::istream& in);
Eigen::MatrixXcd read_matrix_file(const std::string& path);
void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m);
void write_matrix_file(const std::string& path, const Eigen::MatrixXcd& m);

}  // namespace kgk
