#include "sib/analytic_regions.hpp"

#include "sib/prob_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sib {

namespace {

constexpr double kRelevanceSlack = 1e-12;

void check_rates(std::span<const double> rates, int stages) {
  if (static_cast<int>(rates.size()) != stages) {
    throw std::invalid_argument("expected one rate per stage");
  }
  for (double r : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("rates must be finite and nonnegative");
  }
}

std::string interval_message(const char* what, double value, double hi, bool closed) {
  std::ostringstream os;
  os << what << ": relevance " << value << " outside the feasible interval [0, " << hi << (closed ? "]" : ")");
  return os.str();
}

void check_stage(int stage) {
  if (stage < 1) throw std::invalid_argument("stage index must be >= 1");
}

template <typename RateFn>
TradeoffCurve symmetric_tradeoff(FixedRelevance fixed, std::span<const double> grid, double hi,
                                 RateFn rate) {
  if (fixed.stage != 1 && fixed.stage != 2) {
    throw std::invalid_argument("fixed stage must be 1 or 2");
  }
  TradeoffCurve curve;
  curve.stage = 3 - fixed.stage;
  curve.fixed = fixed;
  const double fixed_rate = rate(fixed.stage, fixed.relevance);
  curve.samples.reserve(grid.size());
  for (double d : grid) {
    curve.samples.push_back({std::max(rate(curve.stage, d), fixed_rate), d});
  }
  std::stable_sort(curve.samples.begin(), curve.samples.end(), [](const CurveSample& a, const CurveSample& b) {
    return a.rate < b.rate || (a.rate == b.rate && a.relevance < b.relevance);
  });
  const int free_stage = curve.stage;
  curve.threshold = find_threshold([&](double d) { return rate(free_stage, d); }, fixed_rate, 0.0, hi);
  return curve;
}

}  // namespace

void BinaryModel::validate() const {
  if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("binary model: p must lie in [0, 1/2]");
  if (stages < 1) throw std::invalid_argument("binary model: stages must be >= 1");
}

double BinaryModel::max_relevance() const { return 1.0 - h2(p); }

GaussianModel GaussianModel::from_snr_db(double snr_db, int stages) {
  return GaussianModel{std::pow(10.0, snr_db / 10.0), 1.0, stages};
}

void GaussianModel::validate() const {
  if (!(sigma_x2 > 0.0) || !(sigma_w2 > 0.0) || !std::isfinite(sigma_x2) || !std::isfinite(sigma_w2)) {
    throw std::invalid_argument("gaussian model: variances must be positive");
  }
  if (stages < 1) throw std::invalid_argument("gaussian model: stages must be >= 1");
}

double GaussianModel::max_relevance() const { return 0.5 * std::log2(1.0 + snr()); }

bool AlphaParam::ordered() const {
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!(values[t] >= 0.0 && values[t] <= 0.5)) return false;
    if (t > 0 && values[t] > values[t - 1]) return false;
  }
  return true;
}

bool GammaParam::ordered(double sigma_w2) const {
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!(values[t] >= sigma_w2)) return false;
    if (t > 0 && values[t] > values[t - 1]) return false;
  }
  return true;
}

Eigen::VectorXd binary_max_relevance(const BinaryModel& model, std::span<const double> rates) {
  model.validate();
  check_rates(rates, model.stages);
  Eigen::VectorXd out(model.stages);
  double cumulative = 0.0;
  for (int t = 0; t < model.stages; ++t) {
    cumulative += rates[static_cast<std::size_t>(t)];
    // Rate beyond one bit buys nothing: the inverse saturates at 0.
    const double alpha = h2_inv(std::max(0.0, 1.0 - cumulative));
    out(t) = 1.0 - h2(star(alpha, model.p));
  }
  return out;
}

Eigen::VectorXd gaussian_max_relevance(const GaussianModel& model, std::span<const double> rates) {
  model.validate();
  check_rates(rates, model.stages);
  Eigen::VectorXd out(model.stages);
  double cumulative = 0.0;
  for (int t = 0; t < model.stages; ++t) {
    cumulative += rates[static_cast<std::size_t>(t)];
    const double shrink = std::exp2(-2.0 * cumulative);
    out(t) = 0.5 * std::log2((model.sigma_x2 + model.sigma_w2) / (shrink * model.sigma_x2 + model.sigma_w2));
  }
  return out;
}

GammaParam gamma_from_rates(const GaussianModel& model, std::span<const double> rates) {
  model.validate();
  check_rates(rates, model.stages);
  GammaParam gamma;
  double cumulative = 0.0;
  for (double r : rates) {
    cumulative += r;
    if (cumulative == 0.0) {
      gamma.values.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double shrink = std::exp2(-2.0 * cumulative);
    gamma.values.push_back((shrink * model.sigma_x2 + model.sigma_w2) / (1.0 - shrink));
  }
  return gamma;
}

AlphaParam alpha_from_rates(const BinaryModel& model, std::span<const double> rates) {
  model.validate();
  check_rates(rates, model.stages);
  AlphaParam alpha;
  double cumulative = 0.0;
  for (double r : rates) {
    cumulative += r;
    alpha.values.push_back(h2_inv(std::max(0.0, 1.0 - cumulative)));
  }
  return alpha;
}

RegionPoint binary_point_from_alpha(const BinaryModel& model, const AlphaParam& alpha) {
  model.validate();
  if (static_cast<int>(alpha.values.size()) != model.stages || !alpha.ordered()) {
    throw std::invalid_argument("alpha must hold one nonincreasing value in [0, 1/2] per stage");
  }
  RegionPoint pt{Eigen::VectorXd(model.stages), Eigen::VectorXd(model.stages)};
  double previous = 0.0;
  for (int t = 0; t < model.stages; ++t) {
    const double a = alpha.values[static_cast<std::size_t>(t)];
    const double cumulative = 1.0 - h2(a);
    pt.rates(t) = cumulative - previous;
    pt.relevances(t) = 1.0 - h2(star(a, model.p));
    previous = cumulative;
  }
  return pt;
}

RegionPoint gaussian_point_from_gamma(const GaussianModel& model, const GammaParam& gamma) {
  model.validate();
  if (static_cast<int>(gamma.values.size()) != model.stages || !gamma.ordered(model.sigma_w2)) {
    throw std::invalid_argument("gamma must hold one nonincreasing value >= sigma_w2 per stage");
  }
  RegionPoint pt{Eigen::VectorXd(model.stages), Eigen::VectorXd(model.stages)};
  double previous = 0.0;
  for (int t = 0; t < model.stages; ++t) {
    const double g = gamma.values[static_cast<std::size_t>(t)];
    double cumulative = 0.0;
    double relevance = 0.0;
    if (!GammaParam::unbounded(g)) {
      cumulative = 0.5 * std::log2((g + model.sigma_x2) / (g - model.sigma_w2));
      relevance = 0.5 * std::log2(1.0 + model.sigma_x2 / g);
    }
    pt.rates(t) = cumulative - previous;
    pt.relevances(t) = relevance;
    previous = cumulative;
  }
  return pt;
}

double binary_symmetric_rate(const BinaryModel& model, int stage, double relevance) {
  model.validate();
  check_stage(stage);
  if (model.p >= 0.5) {
    throw std::invalid_argument("binary tradeoff undefined for p = 1/2 (observation independent of source)");
  }
  const double hi = model.max_relevance();
  if (!(relevance >= 0.0 && relevance <= hi + kRelevanceSlack)) {
    throw std::domain_error(interval_message("binary tradeoff", relevance, hi, true));
  }
  const double crossover = h2_inv(std::clamp(1.0 - relevance, 0.0, 1.0));
  const double alpha = std::clamp((crossover - model.p) / (1.0 - 2.0 * model.p), 0.0, 0.5);
  return (1.0 - h2(alpha)) / static_cast<double>(stage);
}

double gaussian_symmetric_rate(const GaussianModel& model, int stage, double relevance) {
  model.validate();
  check_stage(stage);
  const double snr = model.snr();
  const double denom = (1.0 + snr) * std::exp2(-2.0 * relevance) - 1.0;
  if (!(relevance >= 0.0) || !(denom > 0.0)) {
    throw std::domain_error(interval_message("gaussian tradeoff", relevance, model.max_relevance(), false));
  }
  return std::max(0.0, std::log2(snr / denom) / (2.0 * stage));
}

std::vector<double> relevance_grid(double max, int n, bool include_end) {
  if (n < 1) throw std::invalid_argument("grid needs at least one sample");
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double steps = include_end ? std::max(1, n - 1) : n;
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = max * i / steps;
  if (include_end && n > 1) grid.back() = max;
  return grid;
}

TradeoffCurve binary_symmetric_tradeoff(const BinaryModel& model, FixedRelevance fixed,
                                        std::span<const double> grid) {
  if (model.stages != 2) throw std::invalid_argument("symmetric tradeoff needs a two-stage model");
  return symmetric_tradeoff(fixed, grid, model.max_relevance(),
                            [&](int stage, double d) { return binary_symmetric_rate(model, stage, d); });
}

TradeoffCurve gaussian_symmetric_tradeoff(const GaussianModel& model, FixedRelevance fixed,
                                          std::span<const double> grid) {
  if (model.stages != 2) throw std::invalid_argument("symmetric tradeoff needs a two-stage model");
  // The rate diverges at the supremum, so the search stays strictly inside.
  const double hi = model.max_relevance() * (1.0 - 1e-9);
  return symmetric_tradeoff(fixed, grid, hi,
                            [&](int stage, double d) { return gaussian_symmetric_rate(model, stage, d); });
}

std::optional<Threshold> find_threshold(const std::function<double(double)>& free_term,
                                        double fixed_rate, double lo, double hi) {
  constexpr int kScan = 200;
  constexpr double kTol = 1e-8;
  const double at_lo = free_term(lo);
  if (at_lo >= fixed_rate) {
    if (at_lo - fixed_rate <= 1e-12) return Threshold{lo, fixed_rate};
    return std::nullopt;
  }
  double left = lo;
  double right = lo;
  bool bracketed = false;
  for (int i = 1; i <= kScan; ++i) {
    const double x = lo + (hi - lo) * i / kScan;
    if (free_term(x) >= fixed_rate) {
      right = x;
      bracketed = true;
      break;
    }
    left = x;
  }
  if (!bracketed) return std::nullopt;
  while (right - left > kTol) {
    const double mid = 0.5 * (left + right);
    if (free_term(mid) < fixed_rate) {
      left = mid;
    } else {
      right = mid;
    }
  }
  return Threshold{0.5 * (left + right), fixed_rate};
}

}  // namespace sib
