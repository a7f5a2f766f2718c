#include "sib/classifier_bounds.hpp"

#include "sib/analytic_regions.hpp"

#include <cmath>
#include <stdexcept>

namespace sib {

void ClassifierBoundInput::validate() const {
  if (!(source_entropy >= 0.0) || !std::isfinite(source_entropy)) {
    throw std::invalid_argument("source entropy must be finite and nonnegative");
  }
  constexpr double slack = 1e-12;
  for (Eigen::Index t = 0; t < relevances.size(); ++t) {
    const double d = relevances(t);
    if (!(d >= -slack) || d > source_entropy + slack) {
      throw std::domain_error("relevance must lie in [0, H(X)]");
    }
    if (t > 0 && d < relevances(t - 1) - slack) throw std::domain_error("relevances must be nondecreasing in stage");
  }
}

Eigen::VectorXd error_upper_bound(const ClassifierBoundInput& input) {
  input.validate();
  const Eigen::ArrayXd gap = (input.source_entropy - input.relevances.array()).max(0.0);
  return (1.0 - gap.unaryExpr([](double v) { return std::exp2(-v); })).matrix();
}

std::vector<ErrorCurve> binary_error_curve(double p, int stages, std::span<const double> symmetric_rate_grid) {
  if (!(p > 0.0 && p < 0.5)) throw std::invalid_argument("crossover p must lie in (0, 1/2)");
  const BinaryModel model{p, stages};
  model.validate();
  std::vector<ErrorCurve> curves(static_cast<std::size_t>(stages));
  for (int t = 0; t < stages; ++t) curves[static_cast<std::size_t>(t)].stage = t + 1;
  for (double r : symmetric_rate_grid) {
    if (!(r >= 0.0)) throw std::invalid_argument("rates must be nonnegative");
    const std::vector<double> rates(static_cast<std::size_t>(stages), r);
    // Uniform binary source: H(X) = 1 bit.
    const Eigen::VectorXd bound = error_upper_bound({1.0, binary_max_relevance(model, rates)});
    for (int t = 0; t < stages; ++t) {
      curves[static_cast<std::size_t>(t)].points.push_back({stages * r, bound(t)});
    }
  }
  return curves;
}

}  // namespace sib
