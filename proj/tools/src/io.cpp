#include "watsonmle_cli/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "watsonmle/errors.hpp"

namespace watsonmle::cli {
namespace {

bool is_separator(char ch) { return ch == ',' || ch == ' ' || ch == '\t' || ch == '\r' || ch == ';'; }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && is_separator(line[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !is_separator(line[pos])) ++pos;
    if (pos > start) fields.push_back(line.substr(start, pos - start));
  }
  return fields;
}

bool blank_or_comment(std::string_view line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (!is_separator(ch)) return false;
  }
  return true;
}

}  // namespace

Matrix read_matrix(std::istream& in, const ReadOptions& options) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool header_pending = options.skip_header;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split_fields(line);
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected " << cols << " values, found " << fields.size();
      throw IoError(msg.str());
    }
    for (std::string_view field : fields) {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || end != field.data() + field.size() || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "line " << line_no << ": '" << field << "' is not a finite number";
        throw IoError(msg.str());
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw IoError("input contains no data rows");
  Matrix X(rows, cols);
  X.data() = std::move(values);
  return X;
}

Matrix read_matrix_file(const std::string& path, const ReadOptions& options) {
  if (path == "-") return read_matrix(std::cin, options);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file '" + path + "'");
  return read_matrix(in, options);
}

std::vector<std::size_t> read_labels_file(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (path != "-") {
    file.open(path);
    if (!file) throw IoError("cannot open label file '" + path + "'");
    in = &file;
  }
  std::vector<std::size_t> labels;
  std::string line;
  while (std::getline(*in, line)) {
    if (blank_or_comment(line)) continue;
    for (std::string_view field : split_fields(line)) {
      std::size_t v = 0;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || end != field.data() + field.size()) {
        throw IoError("label '" + std::string(field) + "' is not a nonnegative integer");
      }
      labels.push_back(v);
    }
  }
  return labels;
}

void normalize_rows(Matrix& X) {
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto row = X.row(i);
    const double len = norm(row);
    if (!(len > 0.0)) throw DomainError("row " + std::to_string(i) + " is zero and cannot be normalized");
    for (double& v : row) v /= len;
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

void write_matrix(std::ostream& out, const Matrix& X) {
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto row = X.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      out << format_double(row[k]);
    }
    out << '\n';
  }
}

}  // namespace watsonmle::cli
