#pragma once

// Plain-text matrix and label files for the command-line front end.

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "watsonmle/matrix.hpp"

namespace watsonmle::cli {

/// Thrown for unreadable or malformed input files and unwritable outputs.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReadOptions {
  bool skip_header = false;
};

/// One observation per line, values separated by commas and/or whitespace.
/// Blank lines and lines starting with '#' are ignored.
Matrix read_matrix(std::istream& in, const ReadOptions& options = {});

/// "-" reads standard input.
Matrix read_matrix_file(const std::string& path, const ReadOptions& options = {});

/// Nonnegative integer labels, any delimiter, one per observation.
std::vector<std::size_t> read_labels_file(const std::string& path);

/// Rescales every row to unit norm. Zero rows are rejected.
void normalize_rows(Matrix& X);

/// Comma-separated rows in shortest round-trip form.
void write_matrix(std::ostream& out, const Matrix& X);

/// Shortest text that round-trips the double.
std::string format_double(double v);

}  // namespace watsonmle::cli
