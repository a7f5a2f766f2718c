#include "sib/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <thread>
#include <tuple>

namespace sib {

namespace {

constexpr int kRefineSweeps = 100;
constexpr double kDominanceEps = 1e-12;

std::vector<std::vector<int>> compositions(int total, int parts, bool vertices_only) {
  std::vector<std::vector<int>> out;
  if (vertices_only) {
    for (int k = 0; k < parts; ++k) {
      std::vector<int> c(static_cast<std::size_t>(parts), 0);
      c[static_cast<std::size_t>(k)] = total;
      out.push_back(std::move(c));
    }
    return out;
  }
  std::vector<int> c(static_cast<std::size_t>(parts), 0);
  // Recursive fill of the first parts-1 entries; the last takes the remainder.
  auto fill = [&](auto&& self, int pos, int left) -> void {
    if (pos == parts - 1) {
      c[static_cast<std::size_t>(pos)] = left;
      out.push_back(c);
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, left - v);
    }
  };
  fill(fill, 0, total);
  return out;
}

/// Allocation-free evaluation of the objective and region coordinates for
/// encoders held as a flat (y, u^T) row-major array.
class Evaluator {
 public:
  Evaluator(const JointPmf& source, const std::vector<int>& u_sizes)
      : nx_(static_cast<int>(source.x_size())),
        ny_(static_cast<int>(source.y_size())),
        nu_(shape_size(u_sizes)),
        stages_(static_cast<int>(u_sizes.size())),
        u_sizes_(u_sizes),
        pxy_(source.probs()),
        py_(source.py()) {
    stage_symbol_.resize(static_cast<std::size_t>(stages_ * nu_));
    prefix_symbol_.resize(static_cast<std::size_t>(stages_ * nu_));
    for (int u = 0; u < nu_; ++u) {
      const std::vector<int> idx = unravel(u, u_sizes_);
      int prefix = 0;
      for (int t = 0; t < stages_; ++t) {
        prefix = prefix * u_sizes_[static_cast<std::size_t>(t)] + idx[static_cast<std::size_t>(t)];
        stage_symbol_[static_cast<std::size_t>(t * nu_ + u)] = idx[static_cast<std::size_t>(t)];
        prefix_symbol_[static_cast<std::size_t>(t * nu_ + u)] = prefix;
      }
    }
    xu_.resize(static_cast<std::size_t>(nx_ * nu_));
    yu_.resize(static_cast<std::size_t>(ny_ * nu_));
    scratch_.resize(static_cast<std::size_t>((nx_ + ny_ + 1) * (nu_ + 1)));
  }

  int nu() const { return nu_; }
  int ny() const { return ny_; }

  double objective(const double* q, const std::vector<double>& betas) {
    load(q);
    double value = yu_information(stages_ - 1);
    for (int l = 0; l < stages_; ++l) value -= betas[static_cast<std::size_t>(l)] * xu_stage_information(l);
    return value;
  }

  void region(const double* q, RegionPoint& pt) {
    load(q);
    double previous = 0.0;
    for (int t = 0; t < stages_; ++t) {
      const double cumulative = yu_information(t);
      pt.rates(t) = std::max(0.0, cumulative - previous);
      previous = cumulative;
      pt.relevances(t) = xu_stage_information(t);
    }
  }

 private:
  void load(const double* q) {
    for (int y = 0; y < ny_; ++y) {
      for (int u = 0; u < nu_; ++u) yu_[static_cast<std::size_t>(y * nu_ + u)] = py_(y) * q[y * nu_ + u];
    }
    for (int x = 0; x < nx_; ++x) {
      for (int u = 0; u < nu_; ++u) {
        double s = 0.0;
        for (int y = 0; y < ny_; ++y) s += pxy_(x, y) * q[y * nu_ + u];
        xu_[static_cast<std::size_t>(x * nu_ + u)] = s;
      }
    }
  }

  static double plogp(double v) { return v > kZeroProb ? v * std::log2(v) : 0.0; }

  /// MI between rows and a symbol map applied to the columns of `rows x nu_`.
  double mapped_information(const std::vector<double>& joint, int rows, const int* symbol, int symbols) {
    double* cell = scratch_.data();
    std::fill(cell, cell + rows * symbols, 0.0);
    for (int r = 0; r < rows; ++r) {
      for (int u = 0; u < nu_; ++u) cell[r * symbols + symbol[u]] += joint[static_cast<std::size_t>(r * nu_ + u)];
    }
    double h_joint = 0.0;
    double h_rows = 0.0;
    double h_cols = 0.0;
    for (int r = 0; r < rows; ++r) {
      double row = 0.0;
      for (int s = 0; s < symbols; ++s) {
        row += cell[r * symbols + s];
        h_joint -= plogp(cell[r * symbols + s]);
      }
      h_rows -= plogp(row);
    }
    for (int s = 0; s < symbols; ++s) {
      double col = 0.0;
      for (int r = 0; r < rows; ++r) col += cell[r * symbols + s];
      h_cols -= plogp(col);
    }
    return std::max(0.0, h_rows + h_cols - h_joint);
  }

  double yu_information(int through_stage) {
    int symbols = 1;
    for (int t = 0; t <= through_stage; ++t) symbols *= u_sizes_[static_cast<std::size_t>(t)];
    return mapped_information(yu_, ny_, &prefix_symbol_[static_cast<std::size_t>(through_stage * nu_)], symbols);
  }

  double xu_stage_information(int stage) {
    return mapped_information(xu_, nx_, &stage_symbol_[static_cast<std::size_t>(stage * nu_)],
                              u_sizes_[static_cast<std::size_t>(stage)]);
  }

  int nx_, ny_, nu_, stages_;
  std::vector<int> u_sizes_;
  Eigen::MatrixXd pxy_;
  Eigen::VectorXd py_;
  std::vector<int> stage_symbol_;
  std::vector<int> prefix_symbol_;
  std::vector<double> xu_, yu_, scratch_;
};

/// Walks the product lattice (one composition per y) over [begin, end).
template <typename Visit>
void walk_lattice(const std::vector<std::vector<int>>& comps, int ny, int nu, double step, std::uint64_t begin,
                  std::uint64_t end, Visit&& visit) {
  const std::uint64_t base = comps.size();
  std::vector<std::uint64_t> digit(static_cast<std::size_t>(ny));
  std::uint64_t rem = begin;
  for (int y = ny - 1; y >= 0; --y) {
    digit[static_cast<std::size_t>(y)] = rem % base;
    rem /= base;
  }
  std::vector<double> q(static_cast<std::size_t>(ny * nu));
  for (int y = 0; y < ny; ++y) {
    const auto& c = comps[digit[static_cast<std::size_t>(y)]];
    for (int u = 0; u < nu; ++u) q[static_cast<std::size_t>(y * nu + u)] = c[static_cast<std::size_t>(u)] * step;
  }
  for (std::uint64_t index = begin; index < end; ++index) {
    visit(index, q.data());
    for (int y = ny - 1; y >= 0; --y) {
      auto& d = digit[static_cast<std::size_t>(y)];
      d = (d + 1 == base) ? 0 : d + 1;
      const auto& c = comps[d];
      for (int u = 0; u < nu; ++u) q[static_cast<std::size_t>(y * nu + u)] = c[static_cast<std::size_t>(u)] * step;
      if (d != 0) break;
    }
  }
}

std::uint64_t lattice_points(std::size_t per_y, int ny) {
  std::uint64_t n = 1;
  for (int y = 0; y < ny; ++y) {
    if (n > std::numeric_limits<std::uint64_t>::max() / per_y) throw std::overflow_error("lattice too large");
    n *= per_y;
  }
  return n;
}

std::vector<double> lattice_point(const std::vector<std::vector<int>>& comps, int ny, int nu, double step,
                                  std::uint64_t index) {
  std::vector<double> q;
  walk_lattice(comps, ny, nu, step, index, index + 1,
               [&](std::uint64_t, const double* p) { q.assign(p, p + ny * nu); });
  return q;
}

unsigned worker_count(std::uint64_t work) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(hw, std::max<std::uint64_t>(1, work / 4096)));
}

void refuse_if_large(const JointPmf& source, const GridSpec& spec) {
  const int dof = oracle_dof(source, spec);
  if (dof > kOracleMaxDof) {
    throw OracleRefusal("oracle refuses instance with " + std::to_string(dof) + " continuous degrees of freedom (max " +
                            std::to_string(kOracleMaxDof) + ")",
                        dof);
  }
}

bool dominates(const RegionPoint& a, const RegionPoint& b) {
  return (a.rates.array() <= b.rates.array() + kDominanceEps).all() &&
         (a.relevances.array() >= b.relevances.array() - kDominanceEps).all();
}

}  // namespace

void GridSpec::validate() const {
  if (resolution < 2) throw std::invalid_argument("grid resolution must be >= 2");
  if (u_sizes.empty()) throw std::invalid_argument("grid needs at least one description alphabet");
  shape_size(u_sizes);
}

int oracle_dof(const JointPmf& source, const GridSpec& spec) {
  spec.validate();
  return static_cast<int>(source.y_size()) * (shape_size(spec.u_sizes) - 1);
}

OracleResult oracle_min_objective(const JointPmf& source, const std::vector<double>& betas, const GridSpec& spec) {
  refuse_if_large(source, spec);
  if (betas.size() != spec.u_sizes.size()) throw std::invalid_argument("need one beta per stage");
  const int ny = static_cast<int>(source.y_size());
  const int nu = shape_size(spec.u_sizes);
  const int steps = spec.resolution - 1;
  const double step = 1.0 / steps;
  const auto comps = compositions(steps, nu, spec.deterministic_only);
  const std::uint64_t total = lattice_points(comps.size(), ny);

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::uint64_t index = 0;
  };
  const unsigned workers = worker_count(total);
  std::vector<Best> partial(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      Evaluator eval(source, spec.u_sizes);
      const std::uint64_t begin = total * w / workers;
      const std::uint64_t end = total * (w + 1) / workers;
      Best& best = partial[w];
      walk_lattice(comps, ny, nu, step, begin, end, [&](std::uint64_t index, const double* q) {
        const double v = eval.objective(q, betas);
        if (v < best.value) best = {v, index};
      });
    });
  }
  for (auto& t : pool) t.join();
  Best best;
  for (const Best& b : partial) {
    if (b.value < best.value || (b.value == best.value && b.index < best.index)) best = b;
  }

  std::vector<double> q = lattice_point(comps, ny, nu, step, best.index);
  double value = best.value;
  if (!spec.deterministic_only) {
    Evaluator eval(source, spec.u_sizes);
    double delta = step / 10.0;
    for (int sweep = 0; sweep < kRefineSweeps && delta > 1e-9; ++sweep) {
      bool improved = false;
      for (int y = 0; y < ny; ++y) {
        for (int to = 0; to < nu; ++to) {
          for (int from = 0; from < nu; ++from) {
            const std::size_t i = static_cast<std::size_t>(y * nu + to);
            const std::size_t j = static_cast<std::size_t>(y * nu + from);
            if (to == from || q[j] <= 0.0) continue;
            const double moved = std::min(delta, q[j]);
            q[i] += moved;
            q[j] -= moved;
            const double v = eval.objective(q.data(), betas);
            if (v < value - 1e-15) {
              value = v;
              improved = true;
            } else {
              q[i] -= moved;
              q[j] += moved;
            }
          }
        }
      }
      if (!improved) delta *= 0.5;
    }
  }

  Eigen::MatrixXd probs(ny, nu);
  for (int y = 0; y < ny; ++y) {
    for (int u = 0; u < nu; ++u) probs(y, u) = q[static_cast<std::size_t>(y * nu + u)];
    probs.row(y) /= probs.row(y).sum();
  }
  return {value, ConditionalPmf(ny, spec.u_sizes, std::move(probs))};
}

std::vector<RegionPoint> pareto_maximal(std::vector<RegionPoint> points) {
  const auto sum = [](const Eigen::VectorXd& v) { return v.sum(); };
  std::stable_sort(points.begin(), points.end(), [&](const RegionPoint& a, const RegionPoint& b) {
    const double ra = sum(a.rates);
    const double rb = sum(b.rates);
    if (ra != rb) return ra < rb;
    return sum(a.relevances) > sum(b.relevances);
  });
  std::vector<RegionPoint> frontier;
  for (auto& p : points) {
    const bool dominated =
        std::any_of(frontier.begin(), frontier.end(), [&](const RegionPoint& f) { return dominates(f, p); });
    if (!dominated) frontier.push_back(std::move(p));
  }
  return frontier;
}

std::vector<RegionPoint> oracle_region_frontier(const JointPmf& source, const GridSpec& spec) {
  refuse_if_large(source, spec);
  const int ny = static_cast<int>(source.y_size());
  const int nu = shape_size(spec.u_sizes);
  const int stages = static_cast<int>(spec.u_sizes.size());
  const int steps = spec.resolution - 1;
  const auto comps = compositions(steps, nu, spec.deterministic_only);
  const std::uint64_t total = lattice_points(comps.size(), ny);

  const unsigned workers = worker_count(total);
  std::vector<std::vector<RegionPoint>> partial(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      Evaluator eval(source, spec.u_sizes);
      RegionPoint pt{Eigen::VectorXd(stages), Eigen::VectorXd(stages)};
      std::vector<RegionPoint> local;
      walk_lattice(comps, ny, nu, 1.0 / steps, total * w / workers, total * (w + 1) / workers,
                   [&](std::uint64_t, const double* q) {
                     eval.region(q, pt);
                     local.push_back(pt);
                   });
      partial[w] = pareto_maximal(std::move(local));
    });
  }
  for (auto& t : pool) t.join();

  std::vector<RegionPoint> merged;
  for (auto& part : partial) {
    for (auto& p : part) merged.push_back(std::move(p));
  }
  std::vector<RegionPoint> frontier = pareto_maximal(std::move(merged));
  // Collapse numerically identical points so serial and parallel runs agree.
  std::vector<RegionPoint> unique;
  std::set<std::vector<long long>> seen;
  for (auto& p : frontier) {
    std::vector<long long> key;
    for (int t = 0; t < stages; ++t) {
      key.push_back(std::llround(p.rates(t) * 1e9));
      key.push_back(std::llround(p.relevances(t) * 1e9));
    }
    if (seen.insert(key).second) unique.push_back(std::move(p));
  }
  return unique;
}

}  // namespace sib
