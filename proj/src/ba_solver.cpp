#include "sib/ba_solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sib {

namespace {

constexpr int kStallWindow = 50;
constexpr double kStallDamping = 0.5;

/// (u^T, u_t) one-hot map from the flat description alphabet to stage t.
Eigen::MatrixXd stage_projection(const std::vector<int>& u_sizes, int stage) {
  const int total = shape_size(u_sizes);
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(total, u_sizes[static_cast<std::size_t>(stage)]);
  for (int u = 0; u < total; ++u) proj(u, unravel(u, u_sizes)[static_cast<std::size_t>(stage)]) = 1.0;
  return proj;
}

/// (u^T, (u_1..u_t)) one-hot map onto the first `count` descriptions.
Eigen::MatrixXd prefix_projection(const std::vector<int>& u_sizes, int count) {
  const int total = shape_size(u_sizes);
  int suffix = 1;
  for (std::size_t k = static_cast<std::size_t>(count); k < u_sizes.size(); ++k) suffix *= u_sizes[k];
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(total, total / suffix);
  for (int u = 0; u < total; ++u) proj(u, u / suffix) = 1.0;
  return proj;
}

Eigen::ArrayXXd floored_log2(const Eigen::ArrayXXd& a, double floor) { return a.max(floor).log2(); }

void check_encoder_shape(const ConditionalPmf& encoder, const JointPmf& source) {
  if (encoder.given_size != source.y_size()) {
    throw std::invalid_argument("encoder conditions on " + std::to_string(encoder.given_size) +
                                " observation symbols, source has " + std::to_string(source.y_size()));
  }
}

void check_state(const BaState& state, long iteration) {
  try {
    check_pmf(state.encoder);
    check_pmf(state.marginal_uT);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("invalid solver state: ") + e.what(), iteration);
  }
}

double uniform01(std::uint64_t& rng) { return static_cast<double>(splitmix64(rng) >> 11) * 0x1.0p-53; }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void BaConfig::validate(const JointPmf& source) const {
  (void)source;
  if (betas.empty()) throw std::invalid_argument("need at least one stage (one beta)");
  if (u_sizes.size() != betas.size()) throw std::invalid_argument("need one description alphabet size per beta");
  for (double b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("betas must be finite and nonnegative");
  }
  for (int s : u_sizes) {
    if (s < 1) throw std::invalid_argument("description alphabet sizes must be >= 1");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(prob_floor > 0.0 && prob_floor < 1e-3)) throw std::invalid_argument("prob_floor must lie in (0, 1e-3)");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
}

RegionExtraction extract_region_point(const ConditionalPmf& encoder, const JointPmf& source) {
  check_encoder_shape(encoder, source);
  const auto& u_sizes = encoder.out_shape;
  const int stages = static_cast<int>(u_sizes.size());

  // p(y, u^T) laid out over axes (Y, U_1, ..., U_T).
  const Eigen::MatrixXd y_u = source.py().asDiagonal() * encoder.probs;
  std::vector<int> shape{static_cast<int>(source.y_size())};
  shape.insert(shape.end(), u_sizes.begin(), u_sizes.end());
  Eigen::MatrixXd row_major = y_u.transpose();
  const Marginal joint(shape, Eigen::Map<const Eigen::VectorXd>(row_major.data(), row_major.size()));

  const Eigen::MatrixXd x_u = source.probs() * encoder.probs;

  RegionExtraction out{{Eigen::VectorXd(stages), Eigen::VectorXd(stages)}, Eigen::VectorXd(stages)};
  for (int t = 0; t < stages; ++t) {
    // Axes (Y, U_t, U_1..U_{t-1}) for I(Y; U_t | U^{t-1}).
    std::vector<int> keep(static_cast<std::size_t>(t + 2));
    std::iota(keep.begin(), keep.end(), 0);
    const Marginal prefix = marginalize(joint, keep);
    std::vector<int> order{0, t + 1};
    for (int k = 1; k <= t; ++k) order.push_back(k);
    out.point.rates(t) = conditional_mi(permute_axes(prefix, order));
    out.point.relevances(t) = mutual_information_bits(x_u * stage_projection(u_sizes, t));
    out.joint_relevances(t) = mutual_information_bits(x_u * prefix_projection(u_sizes, t + 1));
  }
  return out;
}

double ba_objective(const ConditionalPmf& encoder, const JointPmf& source, const std::vector<double>& betas) {
  check_encoder_shape(encoder, source);
  if (betas.size() != encoder.out_shape.size()) throw std::invalid_argument("need one beta per stage");
  const Eigen::MatrixXd y_u = source.py().asDiagonal() * encoder.probs;
  const Eigen::MatrixXd x_u = source.probs() * encoder.probs;
  double value = mutual_information_bits(y_u);
  for (std::size_t l = 0; l < betas.size(); ++l) {
    value -= betas[l] * mutual_information_bits(x_u * stage_projection(encoder.out_shape, static_cast<int>(l)));
  }
  return value;
}

ConditionalPmf random_encoder(int y_size, const std::vector<int>& u_sizes, std::uint64_t seed) {
  const int total = shape_size(u_sizes);
  Eigen::MatrixXd probs(y_size, total);
  std::uint64_t rng = seed;
  for (int y = 0; y < y_size; ++y) {
    for (int u = 0; u < total; ++u) probs(y, u) = -std::log1p(-uniform01(rng));
    probs.row(y) /= probs.row(y).sum();
  }
  return ConditionalPmf(y_size, u_sizes, std::move(probs));
}

BaState make_state(ConditionalPmf encoder, const JointPmf& source, const BaConfig& config) {
  check_encoder_shape(encoder, source);
  if (encoder.out_shape != config.u_sizes) throw std::invalid_argument("encoder shape does not match u_sizes");
  BaState state;
  const Eigen::VectorXd pu = encoder.probs.transpose() * source.py();
  state.marginal_uT = Marginal(encoder.out_shape, pu);
  state.uT_given_x = source.y_given_x() * encoder.probs;
  const int stages = config.stages();
  for (int t = 0; t < stages; ++t) {
    const Eigen::MatrixXd proj = stage_projection(config.u_sizes, t);
    state.stage_marginals.push_back(proj.transpose() * pu);
    state.stage_given_x.push_back(state.uT_given_x * proj);
    const Eigen::MatrixXd spread = state.stage_given_x.back() * proj.transpose();
    state.rest_given_stage_x.push_back(
        (state.uT_given_x.array() / spread.array().max(config.prob_floor)).matrix());
  }
  state.encoder = std::move(encoder);
  return state;
}

BaState ba_update(const BaState& state, const JointPmf& source, const BaConfig& config) {
  const double floor = config.prob_floor;
  const int stages = config.stages();
  const Eigen::MatrixXd x_given_y = source.x_given_y();
  const Eigen::VectorXd px = source.px();
  const Eigen::Index ny = source.y_size();
  const Eigen::ArrayXd pu = state.marginal_uT.probs.array().max(floor);

  // Log2 of the unnormalized new encoder, rows indexed by y.
  Eigen::ArrayXXd log_q = pu.log2().transpose().replicate(ny, 1);
  for (int l = 0; l < stages; ++l) {
    const double beta = config.betas[static_cast<std::size_t>(l)];
    if (beta == 0.0) continue;
    const Eigen::MatrixXd proj = stage_projection(config.u_sizes, l);
    const Eigen::ArrayXXd ul_given_x = state.stage_given_x[static_cast<std::size_t>(l)].array();
    const Eigen::ArrayXd pul = state.stage_marginals[static_cast<std::size_t>(l)].array().max(floor);
    if (config.rule == UpdateRule::kStationary) {
      // log2 p(x|u_l) = log2 p(u_l|x) + log2 p(x) - log2 p(u_l)
      Eigen::ArrayXXd x_given_ul = ul_given_x.colwise() * px.array();
      x_given_ul.rowwise() /= pul.transpose();
      const Eigen::MatrixXd score = x_given_y.transpose() * floored_log2(x_given_ul, floor).matrix();
      log_q += beta * (score * proj.transpose()).array();
    } else {
      const Eigen::ArrayXXd ratio = (ul_given_x.max(floor).rowwise() / pul.transpose()).log2();
      const Eigen::ArrayXXd spread = (ratio.matrix() * proj.transpose()).array();
      const Eigen::ArrayXXd rest = state.rest_given_stage_x[static_cast<std::size_t>(l)].array().max(floor);
      const Eigen::MatrixXd eta = x_given_y.transpose() * ((1.0 + spread) / rest).matrix();
      const Eigen::ArrayXd gamma = (proj * pul.matrix()).array() / pu;
      log_q += beta * (eta.array().rowwise() - gamma.transpose());
    }
  }

  Eigen::MatrixXd next(ny, log_q.cols());
  for (Eigen::Index y = 0; y < ny; ++y) {
    const Eigen::ArrayXd row =
        (log_q.row(y) - log_q.row(y).maxCoeff()).unaryExpr([](double v) { return std::exp2(v); }).max(floor);
    next.row(y) = (row / row.sum()).matrix().transpose();
  }
  if (config.damping < 1.0) {
    next = config.damping * next + (1.0 - config.damping) * state.encoder.probs;
  }
  if (!next.allFinite()) {
    throw NumericalError("encoder update produced a non-finite probability", state.iteration + 1);
  }

  BaState out = make_state(ConditionalPmf(state.encoder.given_size, state.encoder.out_shape, std::move(next)),
                           source, config);
  out.iteration = state.iteration + 1;
  out.objective_trace = state.objective_trace;
#ifndef NDEBUG
  check_state(out, out.iteration);
#endif
  return out;
}

double encoder_distance(const ConditionalPmf& a, const ConditionalPmf& b) {
  if (a.probs.rows() != b.probs.rows() || a.probs.cols() != b.probs.cols()) {
    throw std::invalid_argument("encoder_distance: shape mismatch");
  }
  return 0.5 * (a.probs - b.probs).cwiseAbs().rowwise().sum().maxCoeff();
}

BaResult ba_run_once(const JointPmf& source, const BaConfig& config) {
  config.validate(source);
  BaConfig cfg = config;
  BaState state = make_state(random_encoder(static_cast<int>(source.y_size()), cfg.u_sizes, cfg.seed), source, cfg);
  check_state(state, 0);
  state.objective_trace.push_back(ba_objective(state.encoder, source, cfg.betas));

  ConditionalPmf best = state.encoder;
  double best_objective = state.objective_trace.back();
  bool converged = false;
  std::vector<double> distances;
  while (state.iteration < cfg.max_iters) {
    BaState next = ba_update(state, source, cfg);
    const double distance = encoder_distance(next.encoder, state.encoder);
    const double objective = ba_objective(next.encoder, source, cfg.betas);
    if (std::isnan(objective)) throw NumericalError("objective is NaN", next.iteration);
    next.objective_trace.push_back(objective);
    state = std::move(next);
    if (objective < best_objective) {
      best_objective = objective;
      best = state.encoder;
    }
    if (distance < cfg.tol) {
      converged = true;
      break;
    }
    distances.push_back(distance);
    const std::size_t n = distances.size();
    if (cfg.auto_damping && cfg.damping == 1.0 && n > kStallWindow &&
        distances[n - 1] >= distances[n - 1 - kStallWindow]) {
      cfg.damping = kStallDamping;
    }
  }
  check_state(state, state.iteration);

  BaResult result;
  result.encoder = converged ? state.encoder : best;
  result.objective = converged ? state.objective_trace.back() : best_objective;
  result.converged = converged;
  result.iterations = state.iteration;
  result.seed = cfg.seed;
  result.objective_trace = std::move(state.objective_trace);
  RegionExtraction region = extract_region_point(result.encoder, source);
  result.region_point = std::move(region.point);
  result.joint_relevances = std::move(region.joint_relevances);
  return result;
}

BaResult ba_run(const JointPmf& source, const BaConfig& config) {
  config.validate(source);
  std::vector<std::future<BaResult>> runs;
  runs.reserve(static_cast<std::size_t>(config.restarts));
  for (int r = 0; r < config.restarts; ++r) {
    BaConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(r);
    runs.push_back(std::async(std::launch::async, [&source, cfg] { return ba_run_once(source, cfg); }));
  }
  std::optional<BaResult> best;
  std::exception_ptr first_error;
  for (auto& run : runs) {
    try {
      BaResult result = run.get();
      if (!best || result.objective < best->objective) best = std::move(result);
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (!best) std::rethrow_exception(first_error);
  return std::move(*best);
}

std::vector<SweepEntry> beta_sweep(const JointPmf& source, const std::vector<std::vector<double>>& beta_grid,
                                   const BaConfig& config_template) {
  std::vector<SweepEntry> out;
  out.reserve(beta_grid.size());
  for (const auto& betas : beta_grid) {
    SweepEntry entry{betas, std::nullopt, {}};
    try {
      BaConfig cfg = config_template;
      cfg.betas = betas;
      entry.result = ba_run(source, cfg);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<BaResult> pareto_filter(const std::vector<SweepEntry>& sweep) {
  std::vector<const BaResult*> ok;
  for (const auto& entry : sweep) {
    if (entry.result) ok.push_back(&*entry.result);
  }
  const auto last = [](const BaResult* r) { return r->region_point.relevances(r->region_point.stages() - 1); };
  std::stable_sort(ok.begin(), ok.end(), [&](const BaResult* a, const BaResult* b) {
    const double sa = a->region_point.sum_rate();
    const double sb = b->region_point.sum_rate();
    return sa < sb || (sa == sb && last(a) > last(b));
  });
  std::vector<BaResult> frontier;
  double best = -std::numeric_limits<double>::infinity();
  for (const BaResult* r : ok) {
    if (last(r) > best) {
      best = last(r);
      frontier.push_back(*r);
    }
  }
  return frontier;
}

}  // namespace sib
