// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance <path to sib executable>

#include "sib/analytic_regions.hpp"
#include "sib/ba_solver.hpp"
#include "sib/classifier_bounds.hpp"
#include "sib/io.hpp"
#include "sib/oracle.hpp"
#include "sib/prob_core.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sib;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;  ///< 0 when the criterion has no runtime bound
  std::function<Outcome()> check;
};

std::string fmt(double v) { return format_number(v); }

double binary_boundary_at(double p, const Eigen::VectorXd& rates, int t) {
  const BinaryModel model{p, static_cast<int>(rates.size())};
  const std::vector<double> r(rates.data(), rates.data() + rates.size());
  return binary_max_relevance(model, r)(t);
}

Outcome binary_threshold() {
  const BinaryModel model{0.2, 2};
  const double fixed_rate = binary_symmetric_rate(model, 2, 0.11);
  const auto th = find_threshold([&](double d) { return binary_symmetric_rate(model, 1, d); }, fixed_rate, 0.0,
                                 model.max_relevance());
  if (!th) return {false, "no threshold found"};
  const bool ok = std::abs(th->relevance - 0.056) <= 0.005 && std::abs(th->rate - 0.16) <= 0.005;
  return {ok, "(delta1, R) = (" + fmt(th->relevance) + ", " + fmt(th->rate) + "), target (0.056, 0.16) +-0.005"};
}

Outcome gaussian_threshold() {
  const GaussianModel model = GaussianModel::from_snr_db(5.0, 2);
  const double fixed_rate = gaussian_symmetric_rate(model, 2, 0.5);
  const auto th = find_threshold([&](double d) { return gaussian_symmetric_rate(model, 1, d); }, fixed_rate, 0.0,
                                 model.max_relevance() * (1.0 - 1e-9));
  if (!th) return {false, "no threshold found"};
  const bool ok = std::abs(th->relevance - 0.27) <= 0.01 && std::abs(th->rate - 0.39) <= 0.01;
  return {ok, "(delta1, R) = (" + fmt(th->relevance) + ", " + fmt(th->rate) + "), target (0.27, 0.39) +-0.01"};
}

Outcome binary_saturation() {
  double worst = 0.0;
  for (double p : {0.1, 0.2, 0.3}) {
    const Eigen::VectorXd d = binary_max_relevance(BinaryModel{p, 2}, std::vector<double>{10.0, 10.0});
    worst = std::max(worst, (d.array() - (1.0 - h2(p))).abs().maxCoeff());
  }
  return {worst <= 1e-6, "max |Delta - (1 - h2(p))| = " + fmt(worst) + " (tol 1e-6)"};
}

Outcome gaussian_saturation() {
  double worst = 0.0;
  for (double db : {-5.0, 0.0, 5.0, 10.0, 20.0}) {
    const GaussianModel model = GaussianModel::from_snr_db(db, 2);
    const Eigen::VectorXd d = gaussian_max_relevance(model, std::vector<double>{20.0, 20.0});
    worst = std::max(worst, std::abs(d(1) - 0.5 * std::log2(1.0 + model.snr())));
  }
  return {worst <= 1e-6, "max |Delta_2 - 0.5 log2(1 + snr)| at rate sum 40 = " + fmt(worst) + " (tol 1e-6)"};
}

Outcome ba_vs_closed_form() {
  const double p = 0.1;
  const JointPmf bsc = JointPmf::binary_symmetric(p);
  BaConfig base;
  base.u_sizes = {2, 2};
  base.restarts = 8;
  base.seed = 1;
  std::vector<std::vector<double>> grid;
  for (int i = 0; i < 10; ++i) grid.push_back({0.3 + 0.02 * i, 1.3 + 0.03 * i});
  const auto sweep = beta_sweep(bsc, grid, base);
  for (const auto& e : sweep) {
    if (!e.result) return {false, "sweep entry failed: " + e.error};
  }
  const auto frontier = pareto_filter(sweep);
  if (frontier.empty()) return {false, "empty frontier"};
  double worst = 0.0;
  for (const auto& r : frontier) {
    for (int t = 0; t < 2; ++t) {
      const double gap = std::abs(binary_boundary_at(p, r.region_point.rates, t) - r.region_point.relevances(t));
      worst = std::max(worst, gap);
    }
  }
  return {worst <= 0.02, std::to_string(frontier.size()) + " Pareto points, max gap to boundary " + fmt(worst) +
                             " bits (tol 0.02), sum rates " + fmt(frontier.front().region_point.sum_rate()) + ".." +
                             fmt(frontier.back().region_point.sum_rate())};
}

Outcome ba_vs_oracle() {
  double worst = 0.0;
  int instances = 0;
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    std::mt19937_64 rng(seed);
    for (int nx : {2, 3}) {
      std::exponential_distribution<double> e(1.0);
      Eigen::MatrixXd m(nx, 2);
      for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < 2; ++y) m(x, y) = e(rng);
      }
      const JointPmf source(m / m.sum());
      for (const auto& betas : std::vector<std::vector<double>>{{3.0}, {2.5, 5.0}}) {
        const std::vector<int> sizes(betas.size(), 2);
        BaConfig cfg;
        cfg.betas = betas;
        cfg.u_sizes = sizes;
        cfg.seed = seed;
        cfg.restarts = 8;
        const BaResult ba = ba_run(source, cfg);
        const OracleResult oracle = oracle_min_objective(source, betas, GridSpec{21, sizes, false});
        worst = std::max(worst, std::abs(ba.objective - oracle.objective));
        ++instances;
      }
    }
  }
  return {worst <= 1e-2, std::to_string(instances) + " instances, max |BA - oracle| = " + fmt(worst) + " (tol 1e-2)"};
}

Outcome classification_bound() {
  std::vector<double> grid(50);
  for (int i = 0; i < 50; ++i) grid[static_cast<std::size_t>(i)] = 2.0 * i / 49.0;
  const std::vector<double> ps{0.05, 0.1, 0.2, 0.25, 0.3, 0.4};
  std::vector<std::vector<ErrorCurve>> curves;
  for (double p : ps) curves.push_back(binary_error_curve(p, 3, grid));
  for (std::size_t k = 0; k < ps.size(); ++k) {
    for (const auto& c : curves[k]) {
      if (c.points.front().bound != 0.5) return {false, "bound at R=0 is " + fmt(c.points.front().bound)};
      for (std::size_t i = 1; i < c.points.size(); ++i) {
        if (c.points[i].bound > c.points[i - 1].bound) return {false, "bound increases with rate"};
      }
    }
    for (std::size_t t = 1; t < 3; ++t) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (curves[k][t].points[i].bound > curves[k][t - 1].points[i].bound) return {false, "bound increases with stage"};
      }
    }
    if (k > 0) {
      for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t i = 1; i < grid.size(); ++i) {
          if (!(curves[k][t].points[i].bound > curves[k - 1][t].points[i].bound)) {
            return {false, "bound not increasing in p"};
          }
        }
      }
    }
  }
  const double target = 1.0 - std::exp2(-h2(0.1));
  double gap = 0.0;
  for (const auto& c : binary_error_curve(0.1, 3, std::vector<double>{40.0})) {
    gap = std::max(gap, std::abs(c.points[0].bound - target));
  }
  return {gap <= 1e-6, "R=0 gives 0.5, monotone in rate, stage and p on a 50-point grid; asymptote gap " + fmt(gap) +
                           " (tol 1e-6)"};
}

Outcome invariant_suites() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  double gerber = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double p = 0.5 * u(rng);
    const int nu = 2 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd channel(2, nu);  // p(u|y)
    for (int y = 0; y < 2; ++y) {
      for (int k = 0; k < nu; ++k) channel(y, k) = e(rng);
      channel.row(y) /= channel.row(y).sum();
    }
    const double q = u(rng);  // P(Y = 1)
    Eigen::MatrixXd yu(2, nu);
    yu.row(0) = (1 - q) * channel.row(0);
    yu.row(1) = q * channel.row(1);
    Eigen::MatrixXd xy(2, 2);
    xy << (1 - q) * (1 - p), q * p, (1 - q) * p, q * (1 - p);
    const Eigen::MatrixXd xu = xy * channel;
    const double hu = entropy_bits(yu.colwise().sum());
    const double hy_u = std::clamp(entropy_bits(yu) - hu, 0.0, 1.0);
    const double hx_u = entropy_bits(xu) - hu;
    gerber = std::max(gerber, h2(star(h2_inv(hy_u), p)) - hx_u);
  }
  double chain = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<int> shape{2 + static_cast<int>(rng() % 2), 2 + static_cast<int>(rng() % 2),
                           2 + static_cast<int>(rng() % 2)};
    Eigen::VectorXd probs(shape_size(shape));
    for (Eigen::Index k = 0; k < probs.size(); ++k) probs(k) = e(rng);
    const Marginal xyz(shape, probs / probs.sum());
    // I(X;YZ) = I(X;Y) + I(X;Z|Y)
    const Marginal x_yz({shape[0], shape[1] * shape[2]}, xyz.probs);
    const double lhs = conditional_mi(x_yz);
    const double rhs = conditional_mi(marginalize(xyz, {0, 1})) + conditional_mi(permute_axes(xyz, {0, 2, 1}));
    chain = std::max(chain, std::abs(lhs - rhs));
  }
  double round_trip = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    round_trip = std::max(round_trip, std::abs(h2(h2_inv(v)) - v));
  }
  double param = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int stages = 1 + static_cast<int>(rng() % 3);
    std::vector<double> rates(static_cast<std::size_t>(stages));
    for (auto& r : rates) r = 0.3 * u(rng);  // cumulative binary rate stays below 1
    const BinaryModel bm{0.05 + 0.4 * u(rng), stages};
    const RegionPoint bp = binary_point_from_alpha(bm, alpha_from_rates(bm, rates));
    const GaussianModel gm{0.1 + 5 * u(rng), 0.1 + 5 * u(rng), stages};
    const RegionPoint gp = gaussian_point_from_gamma(gm, gamma_from_rates(gm, rates));
    for (int t = 0; t < stages; ++t) {
      param = std::max(param, std::abs(bp.rates(t) - rates[static_cast<std::size_t>(t)]));
      param = std::max(param, std::abs(gp.rates(t) - rates[static_cast<std::size_t>(t)]));
    }
  }
  const bool ok = gerber <= 1e-9 && chain <= 1e-9 && round_trip <= 1e-9 && param <= 1e-9;
  return {ok, "entropy inequality slack " + fmt(gerber) + ", chain rule " + fmt(chain) + ", h2 round trip " +
                  fmt(round_trip) + ", alpha/gamma round trip " + fmt(param) + " (tol 1e-9 each)"};
}

int run_cli(const std::string& exe, const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = exe + " " + args + " >" + stdout_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const std::string& exe) {
  const fs::path dir = fs::temp_directory_path() / ("sib_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path src = dir / "bsc.yaml";
  const fs::path grid = dir / "betas.txt";
  std::ofstream(grid) << "1.7,1.8\n3,5\n0,0\n";
  if (run_cli(exe, "source-bsc --p 0.1 --out " + src.string(), dir / "null") != 0) return {false, "source-bsc failed"};
  const std::vector<std::pair<std::string, bool>> commands{
      {"region-binary --p 0.2 --rates 0.16,0.16", false},
      {"region-gaussian --snr-db 5 --rates 0.39,0.39", false},
      {"tradeoff --model binary --p 0.2 --fix 2=0.11", true},
      {"tradeoff --model gaussian --snr-db 5 --fix 2=0.5", true},
      {"ba --source " + src.string() + " --betas 4,8 --u-sizes 2,2 --seed 5", true},
      {"ba-sweep --source " + src.string() + " --beta-grid " + grid.string() + " --seed 5", true},
      {"ba-sweep --pareto --source " + src.string() + " --beta-grid " + grid.string() + " --seed 5", true},
      {"classify-bound", true},
      {"source-bsc --p 0.25", true},
  };
  int index = 0;
  for (const auto& [args, has_out] : commands) {
    std::string files[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / ("run" + std::to_string(index) + "_" + std::to_string(rep));
      const fs::path captured = dir / ("stdout" + std::to_string(index) + "_" + std::to_string(rep));
      const std::string full = has_out ? args + " --out " + out.string() : args;
      if (run_cli(exe, full, captured) != 0) return {false, "command failed: " + args};
      files[rep] = read_text_file((has_out ? out : captured).string());
    }
    if (files[0] != files[1] || files[0].empty()) return {false, "outputs differ: " + args};
    ++index;
  }
  fs::remove_all(dir);
  return {true, std::to_string(commands.size()) + " commands, byte-identical outputs on repeat"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <path to sib executable>\n", argv[0]);
    return 2;
  }
  const std::string exe = argv[1];
  const std::vector<Criterion> criteria{
      {1, "binary threshold", 1.0, binary_threshold},
      {2, "gaussian threshold", 1.0, gaussian_threshold},
      {3, "binary saturation", 0.0, binary_saturation},
      {4, "gaussian saturation", 0.0, gaussian_saturation},
      {5, "BA vs closed form", 60.0, ba_vs_closed_form},
      {6, "BA vs brute force", 120.0, ba_vs_oracle},
      {7, "classification bound", 0.0, classification_bound},
      {8, "invariant suites", 30.0, invariant_suites},
      {9, "CLI determinism", 0.0, [&] { return determinism(exe); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0 && elapsed >= c.time_limit_s) {
      o.pass = false;
      o.detail += "; runtime over " + fmt(c.time_limit_s) + " s";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.3f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                elapsed);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
