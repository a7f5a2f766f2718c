#include "sib/io.hpp"

#include <yaml-cpp/yaml.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>

namespace sib {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

std::vector<std::string> read_alphabet(const YAML::Node& root, const char* key) {
  const YAML::Node node = root[key];
  if (!node) throw InputError(std::string("missing key '") + key + "'", line_of(root));
  if (!node.IsSequence() || node.size() == 0) {
    throw InputError(std::string("'") + key + "' must be a nonempty list of labels", line_of(node));
  }
  std::vector<std::string> labels;
  for (const auto& item : node) {
    if (!item.IsScalar()) throw InputError(std::string("'") + key + "' entries must be labels", line_of(item));
    labels.push_back(item.as<std::string>());
  }
  return labels;
}

double parse_double(const std::string& token, int line) {
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw InputError("'" + token + "' is not a decimal number", line);
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

SourceFile parse_source(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw InputError(e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw InputError("source file must be a mapping with x_alphabet, y_alphabet, joint", 1);

  auto xs = read_alphabet(root, "x_alphabet");
  auto ys = read_alphabet(root, "y_alphabet");
  const YAML::Node joint = root["joint"];
  if (!joint) throw InputError("missing key 'joint'", line_of(root));
  if (!joint.IsSequence() || joint.size() != xs.size()) {
    throw InputError("'joint' must have one row per x_alphabet label (" + std::to_string(xs.size()) + ")",
                     line_of(joint));
  }
  Eigen::MatrixXd probs(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t x = 0; x < xs.size(); ++x) {
    const YAML::Node row = joint[x];
    if (!row.IsSequence() || row.size() != ys.size()) {
      throw InputError("joint row " + std::to_string(x + 1) + " must have one entry per y_alphabet label (" +
                           std::to_string(ys.size()) + ")",
                       line_of(row));
    }
    for (std::size_t y = 0; y < ys.size(); ++y) {
      const YAML::Node cell = row[y];
      if (!cell.IsScalar()) throw InputError("joint entries must be numbers", line_of(cell));
      const double v = parse_double(cell.Scalar(), line_of(cell));
      if (v < 0.0 || v > 1.0) throw InputError("joint entry " + cell.Scalar() + " outside [0, 1]", line_of(cell));
      probs(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = v;
    }
  }
  const double sum = probs.sum();
  if (std::abs(sum - 1.0) > kSourceSumTol) {
    std::ostringstream os;
    os.precision(12);
    os << "joint sums to " << sum << ", expected 1";
    throw InputError(os.str(), line_of(joint));
  }
  probs /= sum;
  return SourceFile{std::move(xs), std::move(ys), JointPmf(std::move(probs))};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'", 0);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

SourceFile load_source_file(const std::string& path) { return parse_source(read_text_file(path)); }

std::string format_source(const SourceFile& source) {
  std::ostringstream os;
  const auto list = [&](const std::vector<std::string>& labels) {
    os << "[";
    for (std::size_t i = 0; i < labels.size(); ++i) os << (i ? ", " : "") << labels[i];
    os << "]\n";
  };
  os << "x_alphabet: ";
  list(source.x_alphabet);
  os << "y_alphabet: ";
  list(source.y_alphabet);
  os << "joint:\n";
  const auto& p = source.joint.probs();
  for (Eigen::Index x = 0; x < p.rows(); ++x) {
    os << "  - [";
    for (Eigen::Index y = 0; y < p.cols(); ++y) {
      char buf[40];
      const auto end = std::to_chars(buf, buf + sizeof buf, p(x, y)).ptr;
      os << (y ? ", " : "") << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    os << "]\n";
  }
  return os.str();
}

std::vector<std::vector<double>> parse_beta_grid(const std::string& text) {
  std::vector<std::vector<double>> grid;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = line.substr(0, line.find('#'));
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream tokens(line);
    std::vector<double> betas;
    std::string token;
    while (tokens >> token) betas.push_back(parse_double(token, number));
    if (betas.empty()) continue;
    if (!grid.empty() && betas.size() != grid.front().size()) {
      throw InputError("beta vector has " + std::to_string(betas.size()) + " entries, expected " +
                           std::to_string(grid.front().size()),
                       number);
    }
    grid.push_back(std::move(betas));
  }
  return grid;
}

std::vector<double> parse_number_list(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw InputError("empty number list", 0);
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::istringstream in(s);
    std::string part;
    while (std::getline(in, part, ':')) parts.push_back(trim(part));
    if (parts.size() != 3) throw InputError("range must be lo:hi:n", 0);
    const double lo = parse_double(parts[0], 0);
    const double hi = parse_double(parts[1], 0);
    const double n = parse_double(parts[2], 0);
    if (n < 1 || n != std::floor(n) || hi < lo) throw InputError("range needs lo <= hi and integer n >= 1", 0);
    const int count = static_cast<int>(n);
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    }
    return out;
  }
  std::vector<double> out;
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) out.push_back(parse_double(trim(part), 0));
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace sib
