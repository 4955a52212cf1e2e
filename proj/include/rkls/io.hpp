#pragma once

// Plain-text matrix and vector files.
//
//   matrix:  "<rows> <cols>" on line 1, then one whitespace-separated row per line
//   vector:  "<n>" on line 1, then one value per line
//
// Values are written with 17 significant digits, which round-trips every
// double exactly. Parsing is locale-independent (std::from_chars).

#include <iosfwd>
#include <string>
#include <string_view>

#include "rkls/linalg.hpp"

namespace rkls {

/// Shortest form that needs at most 17 significant digits; "%.17g" style.
std::string format_double(double v);

MatrixXd parse_matrix(std::string_view text);
VectorXd parse_vector(std::string_view text);
std::string format_matrix(const MatrixXd& A);
std::string format_vector(const VectorXd& v);

MatrixXd load_matrix(const std::string& path);
VectorXd load_vector(const std::string& path);
void save_matrix(const std::string& path, const MatrixXd& A);
void save_vector(const std::string& path, const VectorXd& v);

/// Reads a whole file; throws Error if it cannot be opened.
std::string read_file(const std::string& path);
/// Writes a whole file; throws Error if it cannot be written.
void write_file(const std::string& path, std::string_view contents);

}  // namespace rkls
