#include "sib/prob_core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace sib {

namespace {

std::string format_sum(double s) {
  std::ostringstream os;
  os.precision(17);
  os << s;
  return os.str();
}

}  // namespace

JointPmf::JointPmf(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) {
    throw std::invalid_argument("JointPmf: alphabets must be nonempty");
  }
  if (!probs_.allFinite() || (probs_.array() < 0.0).any()) {
    throw std::invalid_argument("JointPmf: entries must be finite and nonnegative");
  }
  const double s = probs_.sum();
  if (std::abs(s - 1.0) > kJointSumTol) {
    throw std::invalid_argument("JointPmf: entries sum to " + format_sum(s) + ", expected 1");
  }
}

Eigen::MatrixXd JointPmf::x_given_y() const {
  Eigen::MatrixXd out = probs_;
  const Eigen::VectorXd y = py();
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    if (y(c) > 0.0) {
      out.col(c) /= y(c);
    } else {
      out.col(c).setConstant(1.0 / static_cast<double>(out.rows()));
    }
  }
  return out;
}

Eigen::MatrixXd JointPmf::y_given_x() const {
  Eigen::MatrixXd out = probs_;
  const Eigen::VectorXd x = px();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    if (x(r) > 0.0) {
      out.row(r) /= x(r);
    } else {
      out.row(r).setConstant(1.0 / static_cast<double>(out.cols()));
    }
  }
  return out;
}

JointPmf JointPmf::binary_symmetric(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_symmetric: p outside [0, 1]");
  Eigen::MatrixXd m(2, 2);
  m << 0.5 * (1.0 - p), 0.5 * p, 0.5 * p, 0.5 * (1.0 - p);
  return JointPmf(std::move(m));
}

Marginal::Marginal(std::vector<int> shape_, Eigen::VectorXd probs_)
    : shape(std::move(shape_)), probs(std::move(probs_)) {
  if (static_cast<Eigen::Index>(shape_size(shape)) != probs.size()) {
    throw std::invalid_argument("Marginal: shape does not match number of probabilities");
  }
}

ConditionalPmf::ConditionalPmf(int given_size_, std::vector<int> out_shape_, Eigen::MatrixXd probs_)
    : given_size(given_size_), out_shape(std::move(out_shape_)), probs(std::move(probs_)) {
  if (given_size < 1 || probs.rows() != given_size ||
      probs.cols() != static_cast<Eigen::Index>(shape_size(out_shape))) {
    throw std::invalid_argument("ConditionalPmf: dimensions do not match shape");
  }
}

int shape_size(const std::vector<int>& shape) {
  int n = 1;
  for (int s : shape) {
    if (s < 1) throw std::invalid_argument("shape entries must be positive");
    n *= s;
  }
  return n;
}

std::vector<int> unravel(int flat, const std::vector<int>& shape) {
  std::vector<int> idx(shape.size());
  for (std::size_t k = shape.size(); k-- > 0;) {
    idx[k] = flat % shape[k];
    flat /= shape[k];
  }
  return idx;
}

Marginal marginalize(const Marginal& m, const std::vector<int>& keep) {
  const int rank = static_cast<int>(m.shape.size());
  std::vector<int> out_shape;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= rank || (k > 0 && keep[k] <= keep[k - 1])) {
      throw std::invalid_argument("marginalize: axes must be increasing and in range");
    }
    out_shape.push_back(m.shape[static_cast<std::size_t>(keep[k])]);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(shape_size(out_shape));
  std::vector<int> idx(static_cast<std::size_t>(rank), 0);
  for (Eigen::Index flat = 0; flat < m.probs.size(); ++flat) {
    int o = 0;
    for (int a : keep) o = o * m.shape[static_cast<std::size_t>(a)] + idx[static_cast<std::size_t>(a)];
    out(o) += m.probs(flat);
    for (int k = rank - 1; k >= 0; --k) {
      auto& i = idx[static_cast<std::size_t>(k)];
      if (++i < m.shape[static_cast<std::size_t>(k)]) break;
      i = 0;
    }
  }
  return Marginal(std::move(out_shape), std::move(out));
}

Marginal permute_axes(const Marginal& m, const std::vector<int>& order) {
  const std::size_t rank = m.shape.size();
  std::vector<bool> seen(rank, false);
  if (order.size() != rank) throw std::invalid_argument("permute_axes: order must name every axis once");
  std::vector<int> out_shape(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    const int a = order[k];
    if (a < 0 || static_cast<std::size_t>(a) >= rank || seen[static_cast<std::size_t>(a)]) {
      throw std::invalid_argument("permute_axes: order must name every axis once");
    }
    seen[static_cast<std::size_t>(a)] = true;
    out_shape[k] = m.shape[static_cast<std::size_t>(a)];
  }
  Eigen::VectorXd out(m.probs.size());
  for (Eigen::Index flat = 0; flat < m.probs.size(); ++flat) {
    const std::vector<int> idx = unravel(static_cast<int>(flat), m.shape);
    int o = 0;
    for (std::size_t k = 0; k < rank; ++k) o = o * out_shape[k] + idx[static_cast<std::size_t>(order[k])];
    out(o) = m.probs(flat);
  }
  return Marginal(std::move(out_shape), std::move(out));
}

void check_pmf(const Eigen::Ref<const Eigen::VectorXd>& p, double tol, const char* what) {
  if (!p.allFinite()) throw NumericalError(std::string(what) + ": non-finite probability");
  if ((p.array() < 0.0).any()) throw std::invalid_argument(std::string(what) + ": negative probability");
  const double s = p.sum();
  if (std::abs(s - 1.0) > tol) {
    throw std::invalid_argument(std::string(what) + ": probabilities sum to " + format_sum(s));
  }
}

void check_pmf(const Marginal& m, double tol) { check_pmf(m.probs, tol, "Marginal"); }

void check_pmf(const ConditionalPmf& c, double tol) {
  for (Eigen::Index g = 0; g < c.probs.rows(); ++g) {
    check_pmf(c.probs.row(g).transpose(), tol, "ConditionalPmf");
  }
}

double clamp_information(double bits) {
  if (std::isnan(bits)) throw NumericalError("information quantity is NaN");
  if (bits < -kNegativeInfoTol) {
    throw NumericalError("information quantity " + format_sum(bits) + " is negative");
  }
  return std::max(bits, 0.0);
}

double entropy(const Marginal& m) { return entropy_bits(m.probs); }

double h2(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("h2: argument outside [0, 1]");
  double h = 0.0;
  if (p > kZeroProb) h -= p * std::log2(p);
  if (1.0 - p > kZeroProb) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double h2_inv(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("h2_inv: argument outside [0, 1]");
  if (v == 0.0) return 0.0;
  if (v == 1.0) return 0.5;
  double lo = 0.0;
  double hi = 0.5;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (h2(mid) < v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double star(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0)) {
    throw std::domain_error("star: arguments outside [0, 1]");
  }
  return a * (1.0 - b) + b * (1.0 - a);
}

double mutual_information(const JointPmf& j) { return mutual_information_bits(j.probs()); }

double conditional_mi(const Marginal& joint) {
  const int rank = static_cast<int>(joint.shape.size());
  if (rank < 2) throw std::invalid_argument("conditional_mi: need at least axes A and B");
  std::vector<int> c_axes(static_cast<std::size_t>(rank - 2));
  std::iota(c_axes.begin(), c_axes.end(), 2);
  std::vector<int> ac{0};
  std::vector<int> bc{1};
  ac.insert(ac.end(), c_axes.begin(), c_axes.end());
  bc.insert(bc.end(), c_axes.begin(), c_axes.end());

  const double h_abc = entropy(joint);
  const double h_ac = entropy(marginalize(joint, ac));
  const double h_bc = entropy(marginalize(joint, bc));
  const double h_c = c_axes.empty() ? 0.0 : entropy(marginalize(joint, c_axes));
  return clamp_information(h_ac + h_bc - h_abc - h_c);
}

}  // namespace sib
