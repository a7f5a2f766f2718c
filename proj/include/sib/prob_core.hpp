// prob_core.hpp
//
// Finite-alphabet probability primitives. Every information quantity is in
// bits. Multi-axis distributions are stored flat in row-major order (last
// axis varies fastest).
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sib {

/// Probabilities below this are treated as exact zeros in entropy sums.
inline constexpr double kZeroProb = 1e-15;
inline constexpr double kJointSumTol = 1e-12;
inline constexpr double kConditionalSumTol = 1e-10;
/// Information values in (-kNegativeInfoTol, 0) are clamped to zero.
inline constexpr double kNegativeInfoTol = 1e-12;

/// Raised when a computation produces a value that cannot happen for valid
/// inputs (NaN, or a clearly negative information quantity).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, long iteration = -1)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

/// Joint distribution of source X (rows) and observation Y (columns).
class JointPmf {
 public:
  explicit JointPmf(Eigen::MatrixXd probs);

  Eigen::Index x_size() const { return probs_.rows(); }
  Eigen::Index y_size() const { return probs_.cols(); }
  const Eigen::MatrixXd& probs() const { return probs_; }

  Eigen::VectorXd px() const { return probs_.rowwise().sum(); }
  Eigen::VectorXd py() const { return probs_.colwise().sum().transpose(); }
  /// (x, y) -> p(x|y)
  Eigen::MatrixXd x_given_y() const;
  /// (x, y) -> p(y|x)
  Eigen::MatrixXd y_given_x() const;

  /// Uniform X, Y = X through a binary symmetric channel with crossover p.
  static JointPmf binary_symmetric(double p);

 private:
  Eigen::MatrixXd probs_;
};

/// Distribution over a product alphabet described by `shape`.
struct Marginal {
  std::vector<int> shape;
  Eigen::VectorXd probs;

  Marginal() = default;
  Marginal(std::vector<int> shape_, Eigen::VectorXd probs_);

  std::size_t size() const { return static_cast<std::size_t>(probs.size()); }
};

/// p(out-tuple | given). Row g holds the distribution over the flattened
/// out-tuple for conditioning value g.
struct ConditionalPmf {
  int given_size = 0;
  std::vector<int> out_shape;
  Eigen::MatrixXd probs;

  ConditionalPmf() = default;
  ConditionalPmf(int given_size_, std::vector<int> out_shape_, Eigen::MatrixXd probs_);

  int out_size() const { return static_cast<int>(probs.cols()); }
};

/// Product of the entries of a shape vector. Throws on non-positive entries.
int shape_size(const std::vector<int>& shape);

/// Row-major multi-index of flat index `flat` over `shape`.
std::vector<int> unravel(int flat, const std::vector<int>& shape);

/// Sums out every axis not listed in `keep` (which must be increasing).
Marginal marginalize(const Marginal& m, const std::vector<int>& keep);

/// Reorders axes so that output axis k is input axis order[k].
Marginal permute_axes(const Marginal& m, const std::vector<int>& order);

/// Throws if the vector is not a probability vector within `tol`.
void check_pmf(const Eigen::Ref<const Eigen::VectorXd>& p, double tol, const char* what);
void check_pmf(const Marginal& m, double tol = kConditionalSumTol);
void check_pmf(const ConditionalPmf& c, double tol = kConditionalSumTol);

/// Clamps tiny negatives produced by cancellation; larger negatives throw.
double clamp_information(double bits);

/// Shannon entropy in bits of any expression holding probabilities.
template <typename Derived>
double entropy_bits(const Eigen::DenseBase<Derived>& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (v > kZeroProb) h -= v * std::log2(v);
    }
  }
  return h;
}

/// Mutual information in bits of a joint held as a (rows, cols) matrix.
template <typename Derived>
double mutual_information_bits(const Eigen::MatrixBase<Derived>& joint) {
  const double hr = entropy_bits(joint.rowwise().sum());
  const double hc = entropy_bits(joint.colwise().sum());
  return clamp_information(hr + hc - entropy_bits(joint));
}

double entropy(const Marginal& m);

/// Binary entropy function.
double h2(double p);

/// Inverse of h2 restricted to [0, 1/2], by bisection.
double h2_inv(double v);

/// Binary convolution a(1-b) + b(1-a).
double star(double a, double b);

double mutual_information(const JointPmf& j);

/// I(A;B|C) for a joint whose first axis is A, second B, and remaining axes
/// (possibly none) form C.
double conditional_mi(const Marginal& joint);

}  // namespace sib
