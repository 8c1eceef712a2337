#pragma once

// Small text helpers shared by the file formats: number formatting, the
// `a:b` range grammar, row-separated matrix literals and atomic file output.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netmsf/errors.hpp"

namespace netmsf::io {

/// Shortest round-trippable decimal for a double. Output is locale independent.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  if (s.empty()) throw ParseError("empty number for " + std::string(what));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError("invalid number '" + s + "' for " + std::string(what));
  }
  return v;
}

inline long parse_int(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError("invalid integer '" + s + "' for " + std::string(what));
  }
  return v;
}

/// Closed real interval given as `a:b`. Negative bounds are fine (`-50:50`).
struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

inline Range parse_range(std::string_view text) {
  // The separator is the first ':' that is not the leading sign position.
  const std::string s = trim(text);
  const auto pos = s.find(':', 1);
  if (pos == std::string::npos || s.find(':', pos + 1) != std::string::npos) {
    throw ParseError("range must look like a:b, got '" + s + "'");
  }
  Range r{parse_double(s.substr(0, pos), "range lower bound"),
          parse_double(s.substr(pos + 1), "range upper bound")};
  if (!(r.lo < r.hi)) throw ParseError("range lower bound must be below upper bound in '" + s + "'");
  return r;
}

/// Matrix literal: rows separated by ';', entries by whitespace. `3 5; -1 0`.
inline Eigen::MatrixXd parse_matrix_literal(std::string_view text, std::string_view what) {
  std::vector<std::vector<double>> rows;
  for (const auto& row_text : split(text, ';')) {
    std::istringstream in{trim(row_text)};
    std::vector<double> row;
    std::string token;
    while (in >> token) row.push_back(parse_double(token, what));
    if (row.empty()) throw ParseError("empty row in matrix " + std::string(what));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged rows in matrix " + std::string(what));
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes `contents` to a sibling temp file and renames it over `path`, so
/// readers never observe a partially written output.
inline void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("IoError", "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("IoError", "cannot rename onto '" + path.string() + "': " + ec.message());
}

}  // namespace netmsf::io
