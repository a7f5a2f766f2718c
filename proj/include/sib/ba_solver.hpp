// ba_solver.hpp
//
// Blahut-Arimoto type fixed-point solver for the multi-stage bottleneck
// objective
//
//     min_{p(u_1..u_T | y)}  I(U^T; Y) - sum_l beta_l I(U_l; X)
//
// over a joint encoder for all T descriptions. Descriptions are stored as a
// single flattened product alphabet u^T = (u_1, ..., u_T), row-major.
#pragma once

#include "sib/analytic_regions.hpp"
#include "sib/prob_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sib {

/// Which fixed-point expression replaces the encoder each iteration.
enum class UpdateRule {
  /// p(u^T|y) ~ p(u^T) 2^{-sum_l beta_l D(p(x|y) || p(x|u_l))}: the exact
  /// stationarity condition of the Lagrangian with a per-y normalizer.
  kStationary,
  /// Per-stage exponent beta_l p(x|y)(1 + log p(u_l|x)/p(u_l)) / p(u_{-l}|x,u_l)
  /// minus beta_l p(u_l,x)/p(u^T), summed over x. Agrees with kStationary when
  /// T = 1; kept for comparison, it does not converge reliably for T > 1.
  kConditionalWeighted,
};

struct BaConfig {
  std::vector<double> betas;
  std::vector<int> u_sizes;
  int max_iters = 5000;
  double tol = 1e-8;
  double prob_floor = 1e-12;
  std::uint64_t seed = 0;
  int restarts = 8;
  /// Weight of the new encoder when blending with the previous one.
  double damping = 1.0;
  /// Switch to damping 0.5 when the encoder change stalls for 50 iterations.
  bool auto_damping = true;
  UpdateRule rule = UpdateRule::kStationary;

  void validate(const JointPmf& source) const;
  int stages() const { return static_cast<int>(betas.size()); }
};

/// Encoder plus the pmfs derived from it and the source.
struct BaState {
  ConditionalPmf encoder;        ///< p(u^T | y), rows indexed by y
  Marginal marginal_uT;          ///< p(u^T)
  Eigen::MatrixXd uT_given_x;    ///< (x, u^T) -> p(u^T | x)
  std::vector<Eigen::VectorXd> stage_marginals;      ///< p(u_t)
  std::vector<Eigen::MatrixXd> stage_given_x;        ///< (x, u_t) -> p(u_t | x)
  std::vector<Eigen::MatrixXd> rest_given_stage_x;   ///< (x, u^T) -> p(u_{-t} | u_t, x)
  long iteration = 0;
  std::vector<double> objective_trace;
};

struct BaResult {
  ConditionalPmf encoder;
  RegionPoint region_point;          ///< rates I(Y;U_t|U^{t-1}), relevances I(X;U_t)
  Eigen::VectorXd joint_relevances;  ///< I(X;U^t), reported alongside
  double objective = 0.0;
  bool converged = false;
  long iterations = 0;
  std::uint64_t seed = 0;            ///< seed of the restart that produced this result
  std::vector<double> objective_trace;
};

struct RegionExtraction {
  RegionPoint point;
  Eigen::VectorXd joint_relevances;
};

/// Builds p(x, y, u^T) = p(x, y) p(u^T | y) and reads off per-stage rates and
/// relevances.
RegionExtraction extract_region_point(const ConditionalPmf& encoder, const JointPmf& source);

/// I(U^T;Y) - sum_l beta_l I(U_l;X) in bits.
double ba_objective(const ConditionalPmf& encoder, const JointPmf& source, const std::vector<double>& betas);

/// Per-y Dirichlet(1) draws over the u^T alphabet.
ConditionalPmf random_encoder(int y_size, const std::vector<int>& u_sizes, std::uint64_t seed);

/// Computes the marginals of the given encoder (algorithm steps 3-5).
BaState make_state(ConditionalPmf encoder, const JointPmf& source, const BaConfig& config);

/// One fixed-point step: new encoder from the current marginals, then the
/// marginals recomputed for it. Applies `config.damping`.
BaState ba_update(const BaState& state, const JointPmf& source, const BaConfig& config);

/// Max over y of the total-variation distance between two encoders.
double encoder_distance(const ConditionalPmf& a, const ConditionalPmf& b);

/// Iterates from a single random start seeded with `config.seed`.
BaResult ba_run_once(const JointPmf& source, const BaConfig& config);

/// Best objective over `config.restarts` seeded starts (ties keep the earliest).
BaResult ba_run(const JointPmf& source, const BaConfig& config);

struct SweepEntry {
  std::vector<double> betas;
  std::optional<BaResult> result;
  std::string error;  ///< set when the run failed
};

/// One ba_run per beta vector, in grid order. Failures are recorded per entry.
std::vector<SweepEntry> beta_sweep(const JointPmf& source, const std::vector<std::vector<double>>& beta_grid,
                                   const BaConfig& config_template);

/// Successful sweep entries that are not dominated in (sum rate, last-stage
/// relevance), sorted by sum rate.
std::vector<BaResult> pareto_filter(const std::vector<SweepEntry>& sweep);

/// Deterministic 64-bit stream used for initialization and restarts.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace sib
