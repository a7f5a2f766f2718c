// classifier_bounds.hpp
//
// Upper bounds on the stage-wise classification error of a classifier built
// from the first t descriptions: P_err,t <= 1 - 2^{relevance_t - H(X)}.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sib {

struct ClassifierBoundInput {
  double source_entropy = 1.0;   ///< H(X) in bits
  Eigen::VectorXd relevances;    ///< best achievable relevance per stage

  void validate() const;
};

Eigen::VectorXd error_upper_bound(const ClassifierBoundInput& input);

struct ErrorCurvePoint {
  double sum_rate = 0.0;  ///< T * R
  double bound = 0.0;
};

struct ErrorCurve {
  int stage = 1;
  std::vector<ErrorCurvePoint> points;
};

/// Binary-symmetric source with every stage at the same rate R; one curve per
/// stage, sampled at each R of the grid.
std::vector<ErrorCurve> binary_error_curve(double p, int stages, std::span<const double> symmetric_rate_grid);

}  // namespace sib
