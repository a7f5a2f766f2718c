// io.hpp
//
// Text formats used by the command-line tool: YAML source files, beta-grid
// files, and CSV curve output.
#pragma once

#include "sib/prob_core.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace sib {

/// Malformed input data; `line` is 1-based, 0 when no line applies.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, int line) : std::runtime_error(decorate(what, line)), line_(line) {}
  int line() const { return line_; }

 private:
  static std::string decorate(const std::string& what, int line) {
    return line > 0 ? "line " + std::to_string(line) + ": " + what : what;
  }
  int line_;
};

/// Tolerance on the total mass of a source file's joint matrix.
inline constexpr double kSourceSumTol = 1e-9;

struct SourceFile {
  std::vector<std::string> x_alphabet;
  std::vector<std::string> y_alphabet;
  JointPmf joint;
};

/// Parses
///
///   x_alphabet: [x0, x1]
///   y_alphabet: [y0, y1]
///   joint:
///     - [0.45, 0.05]
///     - [0.05, 0.45]
///
/// Rows follow x_alphabet. The matrix is renormalized after the sum check.
SourceFile parse_source(const std::string& text);
SourceFile load_source_file(const std::string& path);

/// Writes `source` in the format accepted by parse_source.
std::string format_source(const SourceFile& source);

/// One beta vector per non-empty line, comma or whitespace separated; `#`
/// starts a comment.
std::vector<std::vector<double>> parse_beta_grid(const std::string& text);

/// "a,b,c" or "lo:hi:n" (n evenly spaced values including both ends).
std::vector<double> parse_number_list(const std::string& text);

/// Nine significant digits, the precision of every CSV value.
std::string format_number(double v);

std::string read_text_file(const std::string& path);

}  // namespace sib
