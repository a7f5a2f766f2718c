// oracle.hpp
//
// Exhaustive reference optimizer for toy alphabets. Encoders are enumerated on
// the exact lattice of the u^T simplex (one composition per observation
// symbol), so every result is reproducible without a seed.
#pragma once

#include "sib/analytic_regions.hpp"
#include "sib/prob_core.hpp"

#include <stdexcept>
#include <vector>

namespace sib {

struct GridSpec {
  int resolution = 21;  ///< lattice points per simplex edge (step 1/(resolution-1))
  std::vector<int> u_sizes;
  bool deterministic_only = false;

  void validate() const;
};

/// Continuous degrees of freedom above which the oracle refuses to run.
inline constexpr int kOracleMaxDof = 12;

class OracleRefusal : public std::invalid_argument {
 public:
  OracleRefusal(const std::string& what, int dof) : std::invalid_argument(what), dof_(dof) {}
  int dof() const { return dof_; }

 private:
  int dof_;
};

struct OracleResult {
  double objective = 0.0;
  ConditionalPmf encoder;
};

/// y_size * (|u^T| - 1).
int oracle_dof(const JointPmf& source, const GridSpec& spec);

/// Grid minimum of I(U^T;Y) - sum_l beta_l I(U_l;X), refined by coordinate
/// descent around the best lattice point (skipped when deterministic_only).
OracleResult oracle_min_objective(const JointPmf& source, const std::vector<double>& betas, const GridSpec& spec);

/// Points of the encoder grid not dominated by any other (rates no larger in
/// every stage, relevances no smaller in every stage), sorted by sum rate.
std::vector<RegionPoint> oracle_region_frontier(const JointPmf& source, const GridSpec& spec);

/// Pareto filter used by the frontier, exposed for testing.
std::vector<RegionPoint> pareto_maximal(std::vector<RegionPoint> points);

}  // namespace sib
