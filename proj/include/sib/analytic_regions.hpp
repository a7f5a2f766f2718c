// analytic_regions.hpp
//
// Closed-form relevance-complexity boundaries for the binary-symmetric and
// scalar Gaussian models, the symmetric-rate tradeoff curves for two stages,
// and detection of the point where the binding stage switches.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace sib {

/// X = Y xor N with Y ~ Bern(1/2), N ~ Bern(p).
struct BinaryModel {
  double p = 0.0;
  int stages = 1;

  void validate() const;
  /// 1 - h2(p), the relevance reached at unlimited rate.
  double max_relevance() const;
};

/// Y = X + W with X ~ N(0, sigma_x2), W ~ N(0, sigma_w2).
struct GaussianModel {
  double sigma_x2 = 1.0;
  double sigma_w2 = 1.0;
  int stages = 1;

  static GaussianModel from_snr_db(double snr_db, int stages);

  void validate() const;
  double snr() const { return sigma_x2 / sigma_w2; }
  /// 0.5 log2(1 + snr).
  double max_relevance() const;
};

/// Per-stage rates (bits/sample) and relevances (bits).
struct RegionPoint {
  Eigen::VectorXd rates;
  Eigen::VectorXd relevances;

  int stages() const { return static_cast<int>(rates.size()); }
  double sum_rate() const { return rates.sum(); }
};

/// Binary cascade noise levels, 0 <= alpha_T <= ... <= alpha_1 <= 1/2.
struct AlphaParam {
  std::vector<double> values;
  bool ordered() const;
};

/// Gaussian cascade test-channel variances, sigma_w2 <= gamma_T <= ... <= gamma_1.
/// An infinite entry stands for a stage whose cumulative rate is zero.
struct GammaParam {
  std::vector<double> values;
  static bool unbounded(double gamma) { return gamma == std::numeric_limits<double>::infinity(); }
  bool ordered(double sigma_w2) const;
};

struct CurveSample {
  double rate = 0.0;
  double relevance = 0.0;
};

/// The (relevance, rate) location where the free stage's requirement meets
/// the fixed stage's requirement.
struct Threshold {
  double relevance = 0.0;
  double rate = 0.0;
};

/// Relevance pinned at one stage while the other is swept.
struct FixedRelevance {
  int stage = 2;
  double relevance = 0.0;
};

/// Minimal symmetric rate as a function of the free stage's relevance.
struct TradeoffCurve {
  int stage = 1;  ///< the free (swept) stage
  FixedRelevance fixed;
  std::vector<CurveSample> samples;
  std::optional<Threshold> threshold;
};

Eigen::VectorXd binary_max_relevance(const BinaryModel& model, std::span<const double> rates);
Eigen::VectorXd gaussian_max_relevance(const GaussianModel& model, std::span<const double> rates);

GammaParam gamma_from_rates(const GaussianModel& model, std::span<const double> rates);
AlphaParam alpha_from_rates(const BinaryModel& model, std::span<const double> rates);

/// Region point traced by the binary cascade U_t = Y xor Bern(alpha_t).
RegionPoint binary_point_from_alpha(const BinaryModel& model, const AlphaParam& alpha);
/// Region point traced by the Gaussian cascade U_t = Y + N(0, gamma_t - sigma_w2).
RegionPoint gaussian_point_from_gamma(const GaussianModel& model, const GammaParam& gamma);

/// Symmetric rate needed so that stage `stage` (using stage * R bits) reaches
/// `relevance`. Throws std::domain_error for infeasible relevance.
double binary_symmetric_rate(const BinaryModel& model, int stage, double relevance);
double gaussian_symmetric_rate(const GaussianModel& model, int stage, double relevance);

/// `n` uniformly spaced relevance samples. With `include_end` the last sample
/// is `max`, otherwise the grid stops one step short of it.
std::vector<double> relevance_grid(double max, int n, bool include_end);

inline constexpr int kDefaultCurveSamples = 200;

TradeoffCurve binary_symmetric_tradeoff(const BinaryModel& model, FixedRelevance fixed,
                                        std::span<const double> grid);
TradeoffCurve gaussian_symmetric_tradeoff(const GaussianModel& model, FixedRelevance fixed,
                                          std::span<const double> grid);

/// Finds the relevance in [lo, hi] where the monotone `free_term` reaches
/// `fixed_rate`: grid scan to bracket, then bisection to 1e-8. Returns nullopt
/// when the free term never reaches the fixed rate on the interval.
std::optional<Threshold> find_threshold(const std::function<double(double)>& free_term,
                                        double fixed_rate, double lo, double hi);

}  // namespace sib
