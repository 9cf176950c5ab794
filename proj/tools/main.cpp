// irtbench command line: convert run archives, fit the Bayesian 2PL model,
// derive information curves, simulate adaptive sessions, and self-check.
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "irtbench/cat.hpp"
#include "irtbench/csv.hpp"
#include "irtbench/diagnostics.hpp"
#include "irtbench/error.hpp"
#include "irtbench/information.hpp"
#include "irtbench/ingest.hpp"
#include "irtbench/model.hpp"
#include "irtbench/report.hpp"
#include "irtbench/rng.hpp"
#include "irtbench/sampler.hpp"

namespace fs = std::filesystem;
using namespace irtbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

// JSON run configuration: top-level keys apply to the app, one object per
// subcommand holds its options. Command-line flags override file values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (!opt->get_lnames().empty() && opt->get_configurable()) {
        if (opt->count() > 0) j[opt->get_lnames()[0]] = opt->results().front();
        else if (default_also && !opt->get_default_str().empty())
          j[opt->get_lnames()[0]] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::FileError(std::string("config is not valid json: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar_to_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void walk(const nlohmann::json& j, std::vector<std::string> parents,
                   std::vector<CLI::ConfigItem>& items) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.value().is_object()) {
        auto deeper = parents;
        deeper.push_back(it.key());
        walk(it.value(), deeper, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (it.value().is_array()) {
        for (const auto& v : it.value()) item.inputs.push_back(scalar_to_string(v));
      } else {
        item.inputs.push_back(scalar_to_string(it.value()));
      }
      items.push_back(std::move(item));
    }
  }
};

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_file(const std::string& path, const std::string& content) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path);
  out << content;
}

std::string two_digits(int k) { return (k < 10 ? "0" : "") + std::to_string(k); }

// ---------------------------------------------------------------------------
// convert

struct ConvertArgs {
  std::string runs_path;
  int dimension = 0;
  double target_precision = -1.0;  // negative means "not set"
  std::string output;
};

int cmd_convert(const ConvertArgs& args) {
  std::ifstream in(args.runs_path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + args.runs_path);
  const auto records = parse_run_csv(in);

  const bool precision_based = !records.empty() && !records.front().has_flag();
  if (precision_based && args.target_precision < 0.0) {
    throw InputError("run csv uses best_precision; --target-precision is required");
  }
  SuccessCriterion criterion{args.target_precision < 0.0 ? 0.0 : args.target_precision};
  const auto matrix = build_response_matrix(records, criterion, args.dimension);
  write_file(args.output, matrix.to_json());
  std::cout << "wrote " << args.output << " (" << matrix.n_items() << " items x "
            << matrix.n_persons() << " persons)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string matrix_path;
  std::string output_prefix;
  PriorConfig priors;
  SamplerConfig sampler;
  std::string metric = "diagonal";
};

std::vector<ParameterSummary> subset_by_prefix(const PosteriorSummary& summary,
                                               const std::string& prefix) {
  std::vector<ParameterSummary> out;
  for (const auto& p : summary.parameters) {
    if (p.name.rfind(prefix, 0) == 0) out.push_back(p);
  }
  return out;
}

void write_legend(const std::string& path, const ResponseMatrix& matrix) {
  std::ostringstream out;
  write_csv_row(out, {"parameter", "kind", "index", "label"});
  for (int i = 0; i < matrix.n_items(); ++i) {
    write_csv_row(out, {"a[" + std::to_string(i + 1) + "]", "discrimination",
                        std::to_string(i + 1), matrix.items[i]});
    write_csv_row(out, {"b[" + std::to_string(i + 1) + "]", "difficulty", std::to_string(i + 1),
                        matrix.items[i]});
  }
  for (int p = 0; p < matrix.n_persons(); ++p) {
    write_csv_row(out, {"theta[" + std::to_string(p + 1) + "]", "ability", std::to_string(p + 1),
                        matrix.persons[p]});
  }
  write_file(path, out.str());
}

int cmd_fit(const FitArgs& args) {
  const auto matrix = ResponseMatrix::from_json_file(args.matrix_path);
  auto config = args.sampler;
  config.metric = args.metric == "dense" ? MetricType::dense : MetricType::diagonal;

  const auto draws = sample(matrix, args.priors, config);
  const auto summary = summarize(draws);

  std::ostringstream draws_csv;
  draws.write_draws_csv(draws_csv);
  write_file(args.output_prefix + "_draws.csv", draws_csv.str());

  std::ostringstream summary_csv;
  summary.write_summary_csv(summary_csv);
  write_file(args.output_prefix + "_summary.csv", summary_csv.str());

  write_legend(args.output_prefix + "_legend.csv", matrix);

  PlotSpec spec;
  spec.kind = PlotKind::interval_plot;
  spec.title = "difficulty (b)";
  write_file(args.output_prefix + "_difficulty.svg",
             render_interval_plot(subset_by_prefix(summary, "b["), spec));
  spec.title = "discrimination (a)";
  write_file(args.output_prefix + "_discrimination.svg",
             render_interval_plot(subset_by_prefix(summary, "a["), spec));
  spec.title = "ability (theta)";
  write_file(args.output_prefix + "_ability.svg",
             render_interval_plot(subset_by_prefix(summary, "theta["), spec));

  write_file(args.output_prefix + "_convergence.html", convergence_report(summary, draws));

  std::cout << "fit complete: " << draws.n_chains << " chains x " << draws.draws_per_chain
            << " draws, " << summary.divergence_count << " divergent\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// curves

struct CurvesArgs {
  std::string summary_path;
  std::string draws_path;
  std::string legend_path;
  std::string output_prefix;
  AbilityGrid grid;
  bool envelope = false;
};

std::map<std::string, std::string> read_legend(const std::string& path) {
  std::map<std::string, std::string> labels;
  for (const auto& row : read_csv_file(path)) {
    if (row.size() >= 4 && row[0] != "parameter") labels[row[0]] = row[3];
  }
  return labels;
}

int cmd_curves(const CurvesArgs& args) {
  args.grid.validate();
  std::vector<std::pair<double, double>> item_params;
  std::vector<double> theta_medians;
  std::optional<MedianCurveSet> median_set;

  if (!args.summary_path.empty()) {
    const auto summary = PosteriorSummary::from_summary_csv_file(args.summary_path);
    const auto bank = bank_from_summary(summary);
    for (const auto& item : bank.items) item_params.emplace_back(item.a, item.b);
    for (const auto& p : summary.parameters) {
      if (p.name.rfind("theta[", 0) == 0) theta_medians.push_back(p.median);
    }
  } else {
    std::ifstream in(args.draws_path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + args.draws_path);
    const auto draws = PosteriorDraws::from_draws_csv(in);
    median_set = median_curves(draws, args.grid, args.envelope);
    item_params = median_set->item_params;
    theta_medians = median_set->theta_medians;
  }
  if (item_params.empty()) throw InputError("no item parameters found in input");

  std::vector<std::pair<std::string, InformationCurve>> labeled_info;
  for (std::size_t i = 0; i < item_params.size(); ++i) {
    const auto [a, b] = item_params[i];
    const auto info = item_information(a, b, args.grid);
    const auto ic = icc(a, b, args.grid);
    const std::string tag = two_digits(static_cast<int>(i) + 1);
    std::ostringstream info_csv, icc_csv;
    write_curve_csv(info_csv, info);
    write_file(args.output_prefix + "_item_info_" + tag + ".csv", info_csv.str());
    write_curve_csv(icc_csv, ic);
    write_file(args.output_prefix + "_icc_" + tag + ".csv", icc_csv.str());
    labeled_info.emplace_back("item " + std::to_string(i + 1), info);
  }

  const auto total = test_information(item_params, args.grid);
  const auto sem_curve = sem(total);
  std::ostringstream total_csv, sem_csv;
  write_curve_csv(total_csv, total);
  write_file(args.output_prefix + "_test_info.csv", total_csv.str());
  write_curve_csv(sem_csv, sem_curve);
  write_file(args.output_prefix + "_sem.csv", sem_csv.str());

  if (median_set && median_set->test_info_envelope) {
    const auto& [lo, hi] = *median_set->test_info_envelope;
    std::ostringstream env;
    write_csv_row(env, {"theta", "lo", "hi"});
    char buf[40];
    for (std::size_t k = 0; k < lo.grid.size(); ++k) {
      std::vector<std::string> row;
      std::snprintf(buf, sizeof(buf), "%.17g", lo.grid[k]);
      row.emplace_back(buf);
      std::snprintf(buf, sizeof(buf), "%.17g", lo.values[k]);
      row.emplace_back(buf);
      std::snprintf(buf, sizeof(buf), "%.17g", hi.values[k]);
      row.emplace_back(buf);
      write_csv_row(env, row);
    }
    write_file(args.output_prefix + "_test_info_envelope.csv", env.str());
  }

  std::map<std::string, std::string> legend;
  if (!args.legend_path.empty()) legend = read_legend(args.legend_path);
  std::vector<std::pair<std::string, double>> abilities;
  for (std::size_t p = 0; p < theta_medians.size(); ++p) {
    const std::string name = "theta[" + std::to_string(p + 1) + "]";
    const auto found = legend.find(name);
    abilities.emplace_back(found != legend.end() ? found->second : name, theta_medians[p]);
  }

  PlotSpec grid_spec;
  grid_spec.kind = PlotKind::curve_grid;
  grid_spec.title = "item information";
  write_file(args.output_prefix + "_item_info.svg", render_curve_grid(labeled_info, grid_spec));

  PlotSpec ti_spec;
  ti_spec.kind = PlotKind::test_info_with_abilities;
  ti_spec.title = "test information";
  write_file(args.output_prefix + "_test_info.svg", render_test_info(total, abilities, ti_spec));

  std::cout << "wrote curves for " << item_params.size() << " items\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cat

struct CatArgs {
  std::string summary_path;
  std::string output_prefix;
  CatConfig config;
  std::uint64_t seed = 0;
  std::optional<double> true_theta;
  int replications = 0;
  double theta_lo = -3.0;
  double theta_hi = 3.0;
};

int cmd_cat(const CatArgs& args) {
  const auto summary = PosteriorSummary::from_summary_csv_file(args.summary_path);
  const auto bank = bank_from_summary(summary);
  auto config = args.config;
  if (config.max_items <= 0) config.max_items = static_cast<int>(bank.items.size());
  config.max_items = std::min<int>(config.max_items, static_cast<int>(bank.items.size()));

  if (args.true_theta) {
    const auto session = run_cat(bank, *args.true_theta, config, args.seed);
    std::ostringstream out;
    session.write_session_csv(out);
    write_file(args.output_prefix + "_session.csv", out.str());
    std::cout << "session: " << session.administered.size() << " items, theta "
              << session.theta_estimate << " (se " << session.theta_se << "), "
              << to_string(session.stopped_reason) << "\n";
  } else {
    const auto batch =
        run_cat_batch(bank, args.replications, args.theta_lo, args.theta_hi, config, args.seed);
    std::ostringstream out;
    write_batch_csv(out, batch);
    write_file(args.output_prefix + "_batch.csv", out.str());
    double items = 0;
    for (const auto& r : batch) items += r.items_used;
    std::cout << "batch: " << batch.size() << " replications, mean items " << items / batch.size()
              << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check

struct CheckArgs {
  std::string matrix_path;
  std::uint64_t seed = 0;
  bool corrupt_gradient = false;
};

int cmd_check(const CheckArgs& args) {
  const auto matrix = ResponseMatrix::from_json_file(args.matrix_path);
  const PriorConfig priors;
  const int ni = matrix.n_items(), np = matrix.n_persons();

  // gradient vs central finite differences on random points
  Rng rng(args.seed);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    ParameterPoint pt;
    for (int i = 0; i < ni; ++i) {
      pt.log_a.push_back(rng.uniform(-1.0, 1.0));
      pt.b.push_back(rng.uniform(-2.0, 2.0));
    }
    for (int p = 0; p < np; ++p) pt.theta.push_back(rng.uniform(-2.0, 2.0));
    auto grad = grad_log_posterior(pt, matrix, priors);
    if (args.corrupt_gradient) grad[0] += 1e-3;  // test hook
    auto flat = pt.to_flat();
    const double h = 1e-5;
    for (std::size_t d = 0; d < flat.size(); ++d) {
      auto hi = flat, lo = flat;
      hi[d] += h;
      lo[d] -= h;
      const double fd = (log_posterior(ParameterPoint::from_flat(hi, ni, np), matrix, priors) -
                         log_posterior(ParameterPoint::from_flat(lo, ni, np), matrix, priors)) /
                        (2 * h);
      worst = std::max(worst, std::abs(grad[d] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  const bool grad_ok = worst < 1e-6;
  std::cout << "gradient check: " << (grad_ok ? "PASS" : "FAIL") << " (max relative error "
            << worst << ")\n";

  // prior-recovery smoke test on a zero-attempt copy of the matrix shape
  ResponseMatrix empty = matrix;
  std::fill(empty.attempts.begin(), empty.attempts.end(), 0L);
  std::fill(empty.successes.begin(), empty.successes.end(), 0L);
  SamplerConfig cfg;
  cfg.chains = 2;
  cfg.draws_per_chain = 800;
  cfg.warmup = 300;
  cfg.master_seed = derive_seed(args.seed, 1);
  const auto summary = summarize(sample(empty, priors, cfg));
  bool prior_ok = true;
  for (const auto& p : summary.parameters) {
    if (p.name.rfind("a[", 0) == 0) continue;
    if (std::abs(p.median) > 0.5) prior_ok = false;
  }
  std::cout << "prior recovery check: " << (prior_ok ? "PASS" : "FAIL") << "\n";

  const bool ok = grad_ok && prior_ok;
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitNumeric;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string params_path;
  long attempts = 0;
  std::uint64_t seed = 0;
  std::string output;
};

ParameterPoint point_from_params_csv(const std::string& path) {
  std::map<int, double> a, b, theta;
  const auto rows = read_csv_file(path);
  if (rows.empty() || rows.front() != std::vector<std::string>{"parameter", "value"}) {
    throw InputError("parameter csv must have header 'parameter,value'");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) throw InputError("parameter csv: malformed row");
    const std::string& name = rows[r][0];
    double value;
    try {
      value = std::stod(rows[r][1]);
    } catch (const std::exception&) {
      throw InputError("parameter csv: non-numeric value for " + name);
    }
    const auto open = name.find('[');
    const auto close = name.find(']');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      throw InputError("parameter csv: expected names like a[1], b[1], theta[1]; got " + name);
    }
    int index;
    try {
      index = std::stoi(name.substr(open + 1, close - open - 1));
    } catch (const std::exception&) {
      throw InputError("parameter csv: non-numeric index in " + name);
    }
    const std::string kind = name.substr(0, open);
    if (kind == "a") a[index] = value;
    else if (kind == "b") b[index] = value;
    else if (kind == "theta") theta[index] = value;
    else throw InputError("parameter csv: unknown parameter kind " + kind);
  }
  if (a.size() != b.size() || a.empty() || theta.empty()) {
    throw InputError("parameter csv: need matching a[i]/b[i] sets and at least one theta[p]");
  }
  ParameterPoint pt;
  for (int i = 1; i <= static_cast<int>(a.size()); ++i) {
    if (!a.count(i) || !b.count(i)) {
      throw InputError("parameter csv: missing a/b at index " + std::to_string(i));
    }
    if (!(a[i] > 0.0)) throw InputError("parameter csv: a must be positive");
    pt.log_a.push_back(std::log(a[i]));
    pt.b.push_back(b[i]);
  }
  for (int p = 1; p <= static_cast<int>(theta.size()); ++p) {
    if (!theta.count(p)) {
      throw InputError("parameter csv: missing theta at index " + std::to_string(p));
    }
    pt.theta.push_back(theta[p]);
  }
  return pt;
}

int cmd_simulate(const SimulateArgs& args) {
  if (args.attempts < 0) throw InputError("--attempts must be non-negative");
  const auto point = point_from_params_csv(args.params_path);
  const std::vector<long> attempts(static_cast<std::size_t>(point.n_items()) * point.n_persons(),
                                   args.attempts);
  const auto matrix = simulate_responses(point, attempts, args.seed);
  write_file(args.output, matrix.to_json());
  std::cout << "wrote " << args.output << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian 2PL analysis of optimization benchmark suites"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON run configuration; flags override file values");

  ConvertArgs convert_args;
  auto* convert = app.add_subcommand("convert", "run-record CSV -> response matrix JSON");
  convert->add_option("--runs", convert_args.runs_path, "run-record csv path")->required();
  convert->add_option("--dimension", convert_args.dimension, "problem dimension filter")->required();
  convert->add_option("--target-precision", convert_args.target_precision,
                      "success threshold for best_precision data");
  convert->add_option("--output", convert_args.output, "output matrix json path")->required();

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "sample the 2PL posterior and report");
  fit->add_option("--matrix", fit_args.matrix_path, "response matrix json")->required();
  fit->add_option("--output-prefix", fit_args.output_prefix, "prefix for output files")->required();
  fit->add_option("--seed", fit_args.sampler.master_seed, "master seed (required)")->required();
  fit->add_option("--chains", fit_args.sampler.chains, "number of chains")->capture_default_str();
  fit->add_option("--draws", fit_args.sampler.draws_per_chain, "post-warmup draws per chain")->capture_default_str();
  fit->add_option("--warmup", fit_args.sampler.warmup, "warmup iterations per chain")->capture_default_str();
  fit->add_option("--target-accept", fit_args.sampler.target_accept,
                  "step size adaptation target")->capture_default_str();
  fit->add_option("--max-leapfrog", fit_args.sampler.max_leapfrog_steps,
                  "leapfrog step budget per iteration")->capture_default_str();
  fit->add_option("--divergence-threshold", fit_args.sampler.divergence_energy_threshold,
                  "energy error marking a divergence")->capture_default_str();
  fit->add_option("--metric", fit_args.metric, "mass matrix structure")->capture_default_str()
      ->check(CLI::IsMember({"diagonal", "dense"}));
  fit->add_option("--a-scale", fit_args.priors.a_scale, "Half-Normal prior scale for a")->capture_default_str();
  fit->add_option("--b-scale", fit_args.priors.b_scale, "Normal prior scale for b")->capture_default_str();
  fit->add_option("--theta-scale", fit_args.priors.theta_scale, "Normal prior scale for theta")->capture_default_str();

  CurvesArgs curves_args;
  auto* curves = app.add_subcommand("curves", "information curves and plots");
  auto* from_summary = curves->add_option("--summary", curves_args.summary_path, "summary csv");
  auto* from_draws = curves->add_option("--draws", curves_args.draws_path, "draws csv");
  from_summary->excludes(from_draws);
  curves->add_option("--legend", curves_args.legend_path, "legend csv for ability labels");
  curves->add_option("--output-prefix", curves_args.output_prefix, "prefix for output files")
      ->required();
  curves->add_option("--grid-lo", curves_args.grid.lo, "ability grid lower bound")->capture_default_str();
  curves->add_option("--grid-hi", curves_args.grid.hi, "ability grid upper bound")->capture_default_str();
  curves->add_option("--grid-step", curves_args.grid.step, "ability grid step")->capture_default_str();
  curves->add_flag("--envelope", curves_args.envelope, "draw-wise 90% envelope (draws input only)");

  CatArgs cat_args;
  auto* cat = app.add_subcommand("cat", "adaptive testing simulation from a fitted item bank");
  cat->add_option("--summary", cat_args.summary_path, "summary csv with a[i]/b[i] medians")
      ->required();
  cat->add_option("--output-prefix", cat_args.output_prefix, "prefix for output files")->required();
  cat->add_option("--seed", cat_args.seed, "master seed (required)")->required();
  cat->add_option("--sem-stop", cat_args.config.sem_stop, "stop when theta se falls below")->capture_default_str();
  cat->add_option("--max-items", cat_args.config.max_items, "item budget (0 = whole bank)")->capture_default_str();
  cat->add_option("--attempts-per-item", cat_args.config.attempts_per_item,
                  "binomial attempts per administered item")->capture_default_str();
  cat->add_option("--prior-scale", cat_args.config.prior_scale, "ability prior scale")->capture_default_str();
  cat->add_option("--grid-lo", cat_args.config.estimator_grid.lo, "estimator grid lower bound")->capture_default_str();
  cat->add_option("--grid-hi", cat_args.config.estimator_grid.hi, "estimator grid upper bound")->capture_default_str();
  cat->add_option("--grid-step", cat_args.config.estimator_grid.step, "estimator grid step")->capture_default_str();
  double true_theta_value = 0.0;
  auto* tt = cat->add_option("--true-theta", true_theta_value, "simulate one session at this ability");
  auto* reps = cat->add_option("--replications", cat_args.replications,
                               "simulate a batch with prior-drawn abilities");
  tt->excludes(reps);
  cat->add_option("--theta-lo", cat_args.theta_lo, "batch truth lower truncation")->capture_default_str();
  cat->add_option("--theta-hi", cat_args.theta_hi, "batch truth upper truncation")->capture_default_str();

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "gradient and prior-recovery self-check");
  check->add_option("--matrix", check_args.matrix_path, "response matrix json")->required();
  check->add_option("--seed", check_args.seed, "seed (required)")->required();
  check->add_flag("--corrupt-gradient", check_args.corrupt_gradient)->group("");  // test hook

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand("simulate", "draw a response matrix from known parameters");
  simulate->add_option("--params", simulate_args.params_path, "csv with parameter,value rows")
      ->required();
  simulate->add_option("--attempts", simulate_args.attempts, "attempts per cell")->required();
  simulate->add_option("--seed", simulate_args.seed, "seed (required)")->required();
  simulate->add_option("--output", simulate_args.output, "output matrix json path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (convert->parsed()) return cmd_convert(convert_args);
    if (fit->parsed()) return cmd_fit(fit_args);
    if (curves->parsed()) {
      if (curves_args.summary_path.empty() == curves_args.draws_path.empty()) {
        throw InputError("curves: need exactly one of --summary and --draws");
      }
      return cmd_curves(curves_args);
    }
    if (cat->parsed()) {
      if (tt->count() > 0) cat_args.true_theta = true_theta_value;
      if (!cat_args.true_theta && cat_args.replications <= 0) {
        throw InputError("cat: need --true-theta or a positive --replications");
      }
      return cmd_cat(cat_args);
    }
    if (check->parsed()) return cmd_check(check_args);
    if (simulate->parsed()) return cmd_simulate(simulate_args);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitInput;
}
