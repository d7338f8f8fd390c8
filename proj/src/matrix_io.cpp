#include "kgk/matrix_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace kgk {

namespace {

double parse_real(const std::string& s, const std::string& token) {
  if (s.empty() || s == "+" || s == "-") throw FormatError("malformed number in '" + token + "'");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno == ERANGE || end != s.c_str() + s.size()) {
    throw FormatError("malformed number in '" + token + "'");
  }
  return v;
}

}  // namespace

cplx parse_complex(const std::string& token) {
  if (token.empty()) throw FormatError("empty matrix entry");
  if (token.back() != 'i') return {parse_real(token, token), 0.0};

  const std::string body = token.substr(0, token.size() - 1);
  // The real/imaginary split is the last sign that does not belong to an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) {
    const std::string imag = (body.empty() || body == "+") ? "1" : (body == "-" ? "-1" : body);
    return {0.0, parse_real(imag, token)};
  }
  const std::string re = body.substr(0, split);
  std::string im = body.substr(split);
  if (im == "+") im = "1";
  if (im == "-") im = "-1";
  return {parse_real(re, token), parse_real(im, token)};
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_complex(cplx value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", value.real(), value.imag());
  return buf;
}

Eigen::MatrixXcd read_matrix(std::istream& in) {
  std::vector<std::vector<cplx>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<cplx> row;
    std::string tok;
    while (ls >> tok) {
      try {
        row.push_back(parse_complex(tok));
      } catch (const FormatError& e) {
        throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("line " + std::to_string(line_no) + ": ragged row (" +
                        std::to_string(row.size()) + " entries, expected " +
                        std::to_string(rows.front().size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("matrix file contains no rows");
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

Eigen::MatrixXcd read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open matrix file '" + path + "'");
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_complex(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_file(const std::string& path, const Eigen::MatrixXcd& m) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write matrix file '" + path + "'");
  write_matrix(out, m);
}

}  // namespace kgk
