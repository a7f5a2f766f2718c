// sib: command-line front end for relevance-complexity computations.
//
// Exit codes: 0 success, 2 usage error, 3 input-data error, 4 numerical failure.

#include "sib/analytic_regions.hpp"
#include "sib/ba_solver.hpp"
#include "sib/classifier_bounds.hpp"
#include "sib/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <tuple>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

/// Usage problems detected after flag parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

std::filesystem::path output_path(const std::string& out) {
  std::filesystem::path path(out);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("SIB_OUTPUT_DIR"); dir && *dir) path = std::filesystem::path(dir) / path;
  }
  return path;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const auto path = output_path(out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw sib::InputError("cannot write '" + path.string() + "'", 0);
  file << text;
}

std::vector<int> to_sizes(const std::vector<double>& values) {
  std::vector<int> sizes;
  for (double v : values) {
    if (v < 1 || v != static_cast<int>(v)) throw UsageError("--u-sizes entries must be positive integers");
    sizes.push_back(static_cast<int>(v));
  }
  return sizes;
}

sib::FixedRelevance parse_fix(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("--fix expects STAGE=RELEVANCE, e.g. 2=0.11");
  try {
    sib::FixedRelevance fixed{std::stoi(text.substr(0, eq)), std::stod(text.substr(eq + 1))};
    if (fixed.stage != 1 && fixed.stage != 2) throw UsageError("--fix stage must be 1 or 2");
    return fixed;
  } catch (const std::logic_error&) {
    throw UsageError("--fix expects STAGE=RELEVANCE, e.g. 2=0.11");
  }
}

struct BaOptions {
  std::string source;
  std::string betas;
  std::string beta_grid;
  std::string u_sizes;
  std::uint64_t seed = 0;
  int restarts = 8;
  int max_iters = 5000;
  double tol = 1e-8;
  double damping = 1.0;
  std::string rule = "stationary";
  bool strict = false;
  bool pareto = false;
  std::string out;
};

sib::BaConfig make_config(const BaOptions& opt, const sib::JointPmf& source, std::size_t stages) {
  sib::BaConfig cfg;
  if (opt.u_sizes.empty()) {
    cfg.u_sizes.assign(stages, static_cast<int>(source.y_size()));
  } else {
    cfg.u_sizes = to_sizes(sib::parse_number_list(opt.u_sizes));
  }
  if (cfg.u_sizes.size() != stages) throw UsageError("--u-sizes needs one entry per stage");
  cfg.seed = opt.seed;
  cfg.restarts = opt.restarts;
  cfg.max_iters = opt.max_iters;
  cfg.tol = opt.tol;
  cfg.damping = opt.damping;
  cfg.rule = opt.rule == "conditional-weighted" ? sib::UpdateRule::kConditionalWeighted : sib::UpdateRule::kStationary;
  return cfg;
}

std::vector<std::string> ba_header(std::size_t stages) {
  std::vector<std::string> h{"sum_rate"};
  for (std::size_t t = 1; t <= stages; ++t) h.push_back("rate_" + std::to_string(t));
  for (std::size_t t = 1; t <= stages; ++t) h.push_back("relevance_" + std::to_string(t));
  for (std::size_t t = 1; t <= stages; ++t) h.push_back("joint_relevance_" + std::to_string(t));
  for (const char* c : {"objective", "converged", "iterations", "seed"}) h.emplace_back(c);
  return h;
}

std::vector<std::string> ba_cells(const sib::BaResult& r) {
  using sib::format_number;
  std::vector<std::string> c{format_number(r.region_point.sum_rate())};
  const auto& pt = r.region_point;
  for (int t = 0; t < pt.stages(); ++t) c.push_back(format_number(pt.rates(t)));
  for (int t = 0; t < pt.stages(); ++t) c.push_back(format_number(pt.relevances(t)));
  for (int t = 0; t < pt.stages(); ++t) c.push_back(format_number(r.joint_relevances(t)));
  c.push_back(format_number(r.objective));
  c.push_back(r.converged ? "1" : "0");
  c.push_back(std::to_string(r.iterations));
  c.push_back(std::to_string(r.seed));
  return c;
}

int run_region_binary(double p, const std::vector<double>& rates) {
  const sib::BinaryModel model{p, static_cast<int>(rates.size())};
  const Eigen::VectorXd delta = sib::binary_max_relevance(model, rates);
  for (Eigen::Index t = 0; t < delta.size(); ++t) {
    std::cout << "stage " << t + 1 << ": Delta_max = " << sib::format_number(delta(t)) << "\n";
  }
  return 0;
}

int run_region_gaussian(double snr_db, const std::vector<double>& rates) {
  const auto model = sib::GaussianModel::from_snr_db(snr_db, static_cast<int>(rates.size()));
  const Eigen::VectorXd delta = sib::gaussian_max_relevance(model, rates);
  for (Eigen::Index t = 0; t < delta.size(); ++t) {
    std::cout << "stage " << t + 1 << ": Delta_max = " << sib::format_number(delta(t)) << "\n";
  }
  return 0;
}

int run_tradeoff(const std::string& kind, double p, double snr_db, bool have_p, bool have_snr,
                 const std::string& fix_text, int samples, const std::string& out) {
  const sib::FixedRelevance fixed = parse_fix(fix_text);
  sib::TradeoffCurve curve;
  if (kind == "binary") {
    if (!have_p || have_snr) throw UsageError("--model binary takes --p (and not --snr-db)");
    const sib::BinaryModel model{p, 2};
    if (p >= 0.5) throw UsageError("--p must be below 1/2 for the tradeoff");
    const auto grid = sib::relevance_grid(model.max_relevance(), samples, true);
    curve = sib::binary_symmetric_tradeoff(model, fixed, grid);
  } else {
    if (!have_snr || have_p) throw UsageError("--model gaussian takes --snr-db (and not --p)");
    const auto model = sib::GaussianModel::from_snr_db(snr_db, 2);
    const auto grid = sib::relevance_grid(model.max_relevance(), samples, false);
    curve = sib::gaussian_symmetric_tradeoff(model, fixed, grid);
  }
  std::ostringstream os;
  os << "rate,delta1,delta2\n";
  for (const auto& s : curve.samples) {
    const double d1 = curve.stage == 1 ? s.relevance : fixed.relevance;
    const double d2 = curve.stage == 2 ? s.relevance : fixed.relevance;
    os << join({sib::format_number(s.rate), sib::format_number(d1), sib::format_number(d2)}) << "\n";
  }
  if (curve.threshold) {
    os << "# threshold: \xCE\x94=" << sib::format_number(curve.threshold->relevance)
       << ", R=" << sib::format_number(curve.threshold->rate) << "\n";
  }
  emit(out, os.str());
  return 0;
}

int run_ba(const BaOptions& opt) {
  const sib::SourceFile file = sib::load_source_file(opt.source);
  const std::vector<double> betas = sib::parse_number_list(opt.betas);
  sib::BaConfig cfg = make_config(opt, file.joint, betas.size());
  cfg.betas = betas;
  const sib::BaResult result = sib::ba_run(file.joint, cfg);
  std::ostringstream os;
  os << join(ba_header(betas.size())) << "\n" << join(ba_cells(result)) << "\n";
  emit(opt.out, os.str());
  if (!result.converged) {
    std::cerr << "warning: no convergence within " << cfg.max_iters << " iterations\n";
    if (opt.strict) return kExitNumerical;
  }
  return 0;
}

int run_ba_sweep(const BaOptions& opt) {
  const sib::SourceFile file = sib::load_source_file(opt.source);
  const auto grid = sib::parse_beta_grid(sib::read_text_file(opt.beta_grid));
  if (grid.empty()) throw sib::InputError("beta grid '" + opt.beta_grid + "' holds no beta vectors", 0);
  const std::size_t stages = grid.front().size();
  const sib::BaConfig cfg = make_config(opt, file.joint, stages);
  const auto sweep = sib::beta_sweep(file.joint, grid, cfg);

  std::ostringstream os;
  bool all_converged = true;
  if (opt.pareto) {
    os << join(ba_header(stages)) << "\n";
    for (const auto& r : sib::pareto_filter(sweep)) os << join(ba_cells(r)) << "\n";
  } else {
    std::vector<std::string> header{"index"};
    for (std::size_t t = 1; t <= stages; ++t) header.push_back("beta_" + std::to_string(t));
    const auto rest = ba_header(stages);
    header.insert(header.end(), rest.begin(), rest.end());
    os << join(header) << "\n";
    std::string failures;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      const auto& e = sweep[i];
      if (!e.result) {
        failures += "# entry " + std::to_string(i) + " failed: " + e.error + "\n";
        all_converged = false;
        continue;
      }
      std::vector<std::string> cells{std::to_string(i)};
      for (double b : e.betas) cells.push_back(sib::format_number(b));
      const auto rest_cells = ba_cells(*e.result);
      cells.insert(cells.end(), rest_cells.begin(), rest_cells.end());
      os << join(cells) << "\n";
      all_converged = all_converged && e.result->converged;
    }
    os << failures;
  }
  emit(opt.out, os.str());
  if (!all_converged) {
    std::cerr << "warning: some sweep entries failed or did not converge\n";
    if (opt.strict) return kExitNumerical;
  }
  return 0;
}

int run_classify_bound(const std::string& p_list, int stages, const std::string& rate_grid, const std::string& out) {
  std::vector<double> ps = sib::parse_number_list(p_list);
  const std::vector<double> rates = sib::parse_number_list(rate_grid);
  for (double p : ps) {
    if (!(p > 0.0 && p < 0.5)) throw UsageError("--p-list entries must lie in (0, 1/2)");
  }
  struct Row {
    double sum_rate, p;
    int stage;
    double bound;
  };
  std::vector<Row> rows;
  for (double p : ps) {
    for (const auto& curve : sib::binary_error_curve(p, stages, rates)) {
      for (const auto& pt : curve.points) rows.push_back({pt.sum_rate, p, curve.stage, pt.bound});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.sum_rate, a.p, a.stage) < std::tie(b.sum_rate, b.p, b.stage);
  });
  std::ostringstream os;
  os << "sum_rate,p,stage,error_bound\n";
  for (const auto& r : rows) {
    os << join({sib::format_number(r.sum_rate), sib::format_number(r.p), std::to_string(r.stage),
                sib::format_number(r.bound)})
       << "\n";
  }
  emit(out, os.str());
  return 0;
}

int run_source_bsc(double p, const std::string& out) {
  const sib::SourceFile file{{"x0", "x1"}, {"y0", "y1"}, sib::JointPmf::binary_symmetric(p)};
  emit(out, sib::format_source(file));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relevance-complexity regions of the multi-stage information bottleneck"};
  app.require_subcommand(1);
  std::function<int()> action;

  // region-binary
  double rb_p = 0.0;
  std::vector<double> rb_rates;
  auto* region_binary = app.add_subcommand("region-binary", "Per-stage maximal relevance, binary-symmetric model");
  region_binary->add_option("--p", rb_p, "crossover probability in [0, 1/2]")->required()->check(CLI::Range(0.0, 0.5));
  region_binary->add_option("--rates", rb_rates, "per-stage rates R1,...,RT (bits)")
      ->required()
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  region_binary->callback([&] { action = [&] { return run_region_binary(rb_p, rb_rates); }; });

  // region-gaussian
  double rg_snr = 0.0;
  std::vector<double> rg_rates;
  auto* region_gaussian = app.add_subcommand("region-gaussian", "Per-stage maximal relevance, scalar Gaussian model");
  region_gaussian->add_option("--snr-db", rg_snr, "signal-to-noise ratio in dB")->required();
  region_gaussian->add_option("--rates", rg_rates, "per-stage rates R1,...,RT (bits)")
      ->required()
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  region_gaussian->callback([&] { action = [&] { return run_region_gaussian(rg_snr, rg_rates); }; });

  // tradeoff
  std::string tr_model;
  double tr_p = 0.0;
  double tr_snr = 0.0;
  std::string tr_fix;
  int tr_grid = sib::kDefaultCurveSamples;
  std::string tr_out;
  auto* tradeoff = app.add_subcommand("tradeoff", "Symmetric-rate tradeoff curve for two stages");
  tradeoff->add_option("--model", tr_model, "binary or gaussian")
      ->required()
      ->check(CLI::IsMember({"binary", "gaussian"}));
  auto* tr_p_opt = tradeoff->add_option("--p", tr_p, "crossover probability")->check(CLI::Range(0.0, 0.5));
  auto* tr_snr_opt = tradeoff->add_option("--snr-db", tr_snr, "signal-to-noise ratio in dB");
  tradeoff->add_option("--fix", tr_fix, "fixed relevance as STAGE=BITS, e.g. 2=0.11")->required();
  tradeoff->add_option("--grid", tr_grid, "number of relevance samples")->check(CLI::PositiveNumber);
  tradeoff->add_option("--out", tr_out, "output CSV (stdout when omitted)");
  tradeoff->callback([&] {
    action = [&] {
      return run_tradeoff(tr_model, tr_p, tr_snr, tr_p_opt->count() > 0, tr_snr_opt->count() > 0, tr_fix, tr_grid,
                          tr_out);
    };
  });

  // ba and ba-sweep share their solver options.
  BaOptions ba_opt;
  const auto add_solver_options = [&](CLI::App* cmd) {
    cmd->add_option("--source", ba_opt.source, "YAML source file")->required();
    cmd->add_option("--u-sizes", ba_opt.u_sizes, "description alphabet sizes (default |Y| each)");
    cmd->add_option("--seed", ba_opt.seed, "seed of the first restart");
    cmd->add_option("--restarts", ba_opt.restarts, "random restarts per run")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", ba_opt.max_iters, "iteration cap per restart")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", ba_opt.tol, "total-variation convergence tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--damping", ba_opt.damping, "weight of the new encoder in (0, 1]")
        ->check(CLI::Range(1e-6, 1.0));
    cmd->add_option("--update-rule", ba_opt.rule, "stationary or conditional-weighted")
        ->check(CLI::IsMember({"stationary", "conditional-weighted"}));
    cmd->add_flag("--strict", ba_opt.strict, "exit 4 when a run does not converge");
    cmd->add_option("--out", ba_opt.out, "output CSV (stdout when omitted)");
  };
  auto* ba = app.add_subcommand("ba", "Run the Blahut-Arimoto type solver on a source file");
  add_solver_options(ba);
  ba->add_option("--betas", ba_opt.betas, "multipliers b1,...,bT")->required();
  ba->callback([&] { action = [&] { return run_ba(ba_opt); }; });

  auto* ba_sweep = app.add_subcommand("ba-sweep", "Run the solver for every beta vector of a grid file");
  add_solver_options(ba_sweep);
  ba_sweep->add_option("--beta-grid", ba_opt.beta_grid, "file with one beta vector per line")->required();
  ba_sweep->add_flag("--pareto", ba_opt.pareto, "emit only the Pareto frontier (sum rate vs last relevance)");
  ba_sweep->callback([&] { action = [&] { return run_ba_sweep(ba_opt); }; });

  // classify-bound
  std::string cb_p = "0.1,0.2,0.3";
  int cb_stages = 3;
  std::string cb_rates = "0:1:50";
  std::string cb_out;
  auto* classify = app.add_subcommand("classify-bound", "Classification-error upper bounds, binary model");
  classify->add_option("--p-list", cb_p, "crossover probabilities in (0, 1/2)");
  classify->add_option("--stages", cb_stages, "number of stages T")->check(CLI::PositiveNumber);
  classify->add_option("--rate-grid", cb_rates, "symmetric rates: a,b,c or lo:hi:n");
  classify->add_option("--out", cb_out, "output CSV (stdout when omitted)");
  classify->callback([&] { action = [&] { return run_classify_bound(cb_p, cb_stages, cb_rates, cb_out); }; });

  // source-bsc
  double sb_p = 0.1;
  std::string sb_out;
  auto* source_bsc = app.add_subcommand("source-bsc", "Write a binary-symmetric source file");
  source_bsc->add_option("--p", sb_p, "crossover probability")->required()->check(CLI::Range(0.0, 1.0));
  source_bsc->add_option("--out", sb_out, "output file (stdout when omitted)");
  source_bsc->callback([&] { action = [&] { return run_source_bsc(sb_p, sb_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const sib::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitData;
  } catch (const sib::NumericalError& e) {
    std::cerr << "numerical failure";
    if (e.iteration() >= 0) std::cerr << " at iteration " << e.iteration();
    std::cerr << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::logic_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
