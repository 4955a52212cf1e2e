#include "rkls/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "rkls/errors.hpp"

namespace rkls {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

using Kind = ParseError::Kind;

struct Line {
  std::size_t number;
  std::vector<std::string_view> fields;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Non-blank lines with their 1-based numbers.
std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++number;
    auto fields = split_fields(text.substr(pos, end - pos));
    if (!fields.empty()) lines.push_back({number, std::move(fields)});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

double parse_value(std::string_view s, std::size_t line) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(Kind::BadNumber, line, "cannot parse '" + std::string(s) + "' as a number");
  }
  if (!std::isfinite(v)) throw ParseError(Kind::NonFinite, line, "non-finite value '" + std::string(s) + "'");
  return v;
}

long parse_dim(std::string_view s, std::size_t line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
    throw ParseError(Kind::MalformedHeader, line, "bad dimension '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

MatrixXd parse_matrix(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0].fields.size() != 2) {
    throw ParseError(Kind::MalformedHeader, lines.empty() ? 1 : lines[0].number,
                     "expected header '<rows> <cols>'");
  }
  const long rows = parse_dim(lines[0].fields[0], lines[0].number);
  const long cols = parse_dim(lines[0].fields[1], lines[0].number);
  MatrixXd A(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const auto idx = static_cast<std::size_t>(i) + 1;
    if (idx >= lines.size()) {
      const std::size_t after = lines.back().number + 1;
      throw ParseError(Kind::RowCount, after,
                       "expected " + std::to_string(rows) + " rows, found " + std::to_string(i));
    }
    const Line& line = lines[idx];
    if (static_cast<long>(line.fields.size()) != cols) {
      throw ParseError(Kind::RaggedRow, line.number,
                       "expected " + std::to_string(cols) + " values, found " +
                           std::to_string(line.fields.size()));
    }
    for (long j = 0; j < cols; ++j) A(i, j) = parse_value(line.fields[static_cast<std::size_t>(j)], line.number);
  }
  if (lines.size() > static_cast<std::size_t>(rows) + 1) {
    throw ParseError(Kind::RowCount, lines[static_cast<std::size_t>(rows) + 1].number,
                     "more rows than the header declares");
  }
  return A;
}

VectorXd parse_vector(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0].fields.size() != 1) {
    throw ParseError(Kind::MalformedHeader, lines.empty() ? 1 : lines[0].number, "expected header '<n>'");
  }
  const long n = parse_dim(lines[0].fields[0], lines[0].number);
  VectorXd v(n);
  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i) + 1;
    if (idx >= lines.size()) {
      throw ParseError(Kind::RowCount, lines.back().number + 1,
                       "expected " + std::to_string(n) + " values, found " + std::to_string(i));
    }
    if (lines[idx].fields.size() != 1) {
      throw ParseError(Kind::RaggedRow, lines[idx].number, "expected one value per line");
    }
    v(i) = parse_value(lines[idx].fields[0], lines[idx].number);
  }
  if (lines.size() > static_cast<std::size_t>(n) + 1) {
    throw ParseError(Kind::RowCount, lines[static_cast<std::size_t>(n) + 1].number,
                     "more values than the header declares");
  }
  return v;
}

std::string format_matrix(const MatrixXd& A) {
  std::string out = std::to_string(A.rows()) + " " + std::to_string(A.cols()) + "\n";
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(A(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string format_vector(const VectorXd& v) {
  std::string out = std::to_string(v.size()) + "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += format_double(v(i));
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

MatrixXd load_matrix(const std::string& path) { return parse_matrix(read_file(path)); }
VectorXd load_vector(const std::string& path) { return parse_vector(read_file(path)); }
void save_matrix(const std::string& path, const MatrixXd& A) { write_file(path, format_matrix(A)); }
void save_vector(const std::string& path, const VectorXd& v) { write_file(path, format_vector(v)); }

}  // namespace rkls
