#include "shuffled/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "shuffled/config.hpp"
#include "shuffled/csv.hpp"
#include "shuffled/estimators.hpp"
#include "shuffled/rng.hpp"
#include "shuffled/study.hpp"
#include "shuffled/synth.hpp"

namespace shuffled::cli {
namespace {

namespace fs = std::filesystem;

/// Bad input discovered after flag parsing (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Accepts inline JSON ("{...}") or a path to a JSON file.
Json load_json(const std::string& text_or_path) {
  const auto first = text_or_path.find_first_not_of(" \t\r\n");
  const bool inline_json = first != std::string::npos && text_or_path[first] == '{';
  const std::string text = inline_json ? text_or_path : read_file(text_or_path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("invalid JSON in " + (inline_json ? std::string("inline argument") : text_or_path) +
                     ": " + e.what());
  }
}

void emit(const std::string& text, const std::string& output, std::ostream& out) {
  if (output.empty() || output == "-") {
    out << text;
    return;
  }
  std::ofstream f(output, std::ios::binary);
  if (!f) throw UsageError("cannot write " + output);
  f << text;
}

Json weights_json(const WeightVector& w) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < w.size(); ++i) a.push_back(w[i]);
  return a;
}

struct FitOptions {
  std::string input;
  std::string output;
  std::string label_col = "y";
  std::string replication_col;
  std::string estimator = "auto";
  std::string loss_spec;
  std::string fit_config;
  std::optional<int> starts;
  std::optional<double> step;
  std::optional<double> threshold;
  std::optional<int> max_iters;
  std::optional<std::uint64_t> seed;
  bool normalize = false;
};

void run_fit(const FitOptions& o, std::ostream& out) {
  CsvOptions csv;
  csv.label_column = o.label_col;
  if (!o.replication_col.empty()) csv.replication_column = o.replication_col;
  const CsvDataset data = read_csv(fs::path(o.input), csv);
  const Dataset ds = o.normalize ? normalize_minmax(data.dataset).dataset : data.dataset;

  EstimatorChoice choice;
  try {
    choice.kind = parse_estimator(o.estimator);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!o.loss_spec.empty()) choice.loss = loss_spec_from_json(load_json(o.loss_spec));
  if (!o.fit_config.empty()) choice.fit = fit_config_from_json(load_json(o.fit_config));
  if (o.starts) choice.fit.starts = *o.starts;
  if (o.step) choice.fit.step = *o.step;
  if (o.threshold) choice.fit.threshold = *o.threshold;
  if (o.max_iters) choice.fit.max_iters = *o.max_iters;
  if (o.seed) choice.fit.seed = *o.seed;
  try {
    choice.fit.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const Estimate est = estimate(ds, choice);
  Json candidates = Json::array();
  for (const auto& c : est.candidates) {
    candidates.push_back(Json{{"weights", weights_json(c.weights)}, {"ls_loss", c.loss}});
  }
  Json converged = Json::array();
  for (bool c : est.fit.converged) converged.push_back(c);
  const std::string resolved(to_string(est.resolved));

  Json result{
      {"weights", weights_json(est.fit.weights)},
      {"loss", est.fit.loss},
      {"estimator_resolved", resolved},
      {"diagnostics",
       Json{{"resolved", resolved},
            {"requested", std::string(to_string(choice.kind))},
            {"method", est.method},
            {"n", ds.size()},
            {"d", ds.dim()},
            {"replications", ds.replication_count()},
            {"feature_names", data.feature_names},
            {"normalized", o.normalize},
            {"start_index", est.fit.start_index},
            {"iterations_per_start", est.fit.iterations_per_start},
            {"converged", converged},
            {"evaluations", est.fit.evaluations},
            {"candidates", candidates},
            {"warnings", est.warnings}}}};
  emit(result.dump(2) + "\n", o.output, out);
}

struct SimulateOptions {
  std::string input;
  std::string output;
  std::string truth;
  std::optional<std::uint64_t> seed;
};

void run_simulate(const SimulateOptions& o, std::ostream& out) {
  Scenario scenario = scenario_from_json(load_json(o.input));
  if (o.seed) {
    scenario.design_seed = derive_seed(*o.seed, "design");
    scenario.w0_seed = derive_seed(*o.seed, "w0");
    scenario.perm_seed = derive_seed(*o.seed, "perm");
    scenario.noise_seed = derive_seed(*o.seed, "noise");
  }
  const SimulatedInstance inst = simulate(scenario);
  CsvDataset data{inst.dataset, default_feature_names(inst.dataset.dim()), "y", std::nullopt};
  if (scenario.replications > 1) data.replication_name = "replication";
  std::ostringstream csv;
  write_csv(csv, data);
  emit(csv.str(), o.output, out);
  if (!o.truth.empty()) {
    const Json truth{{"w0", weights_json(inst.w0)}, {"sigma", inst.sigma}};
    emit(truth.dump(2) + "\n", o.truth, out);
  }
}

struct StudyOptions {
  std::string study;
  std::string output = "results";
  std::optional<std::uint64_t> seed;
  std::string input;  // control only
  std::string label_col = "y";
};

void run_study_command(const std::string& command, const StudyOptions& o, std::ostream& out) {
  Json config;
  fs::path base_dir;
  if (!o.study.empty()) {
    config = load_json(o.study);
    if (o.study.find('{') == std::string::npos) base_dir = fs::path(o.study).parent_path();
  } else if (command == "control") {
    config = Json{{"study", "control"}};
  } else {
    throw UsageError(command + " requires --study");
  }
  if (!config.is_object()) throw UsageError("study config must be a JSON object");
  if (command == "sweep" && config.value("study", "sweep") != "sweep") {
    throw UsageError("sweep expects a study with \"study\": \"sweep\"");
  }
  if (command == "control") {
    if (config.value("study", "control") != "control") {
      throw UsageError("control expects a study with \"study\": \"control\"");
    }
    if (!o.input.empty()) {
      config["input"] = fs::absolute(o.input).string();
      config["label_col"] = o.label_col;
    }
  }
  if (!config.contains("study")) config["study"] = command;
  if (o.seed) config["seed"] = *o.seed;

  const StudyOutput result = run_study(config, base_dir);
  write_study(result, o.output);
  out << result.figure_table.to_csv();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shuffled linear regression: estimators, simulation and studies", "shuffled"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit weights to a CSV dataset and print JSON");
  fit_cmd->add_option("--input", fit.input, "CSV file with a header row")->required();
  fit_cmd->add_option("--output", fit.output, "JSON output path (default: stdout)");
  fit_cmd->add_option("--label-col", fit.label_col, "Name of the label column")
      ->capture_default_str();
  fit_cmd->add_option("--replication-col", fit.replication_col,
                      "Name of the integer replication column (default: one replication)");
  fit_cmd->add_option("--estimator", fit.estimator, "One of: " + estimator_names())
      ->capture_default_str();
  fit_cmd->add_option("--loss-spec", fit.loss_spec, "Loss spec as a JSON file or inline JSON");
  fit_cmd->add_option("--fit-config", fit.fit_config, "Fit config as a JSON file or inline JSON");
  fit_cmd->add_option("--starts", fit.starts, "Number of random starts");
  fit_cmd->add_option("--step", fit.step, "Initial gradient step size");
  fit_cmd->add_option("--threshold", fit.threshold, "Convergence threshold on the loss change");
  fit_cmd->add_option("--max-iters", fit.max_iters, "Iteration cap per start");
  fit_cmd->add_option("--seed", fit.seed, "Seed for the random starts");
  fit_cmd->add_flag("--normalize", fit.normalize, "Min-max normalize features and labels first");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a simulated shuffled dataset as CSV");
  sim_cmd->add_option("--input,--study", sim.input, "Scenario JSON file or inline JSON")->required();
  sim_cmd->add_option("--output", sim.output, "CSV output path (default: stdout)");
  sim_cmd->add_option("--truth", sim.truth, "Also write the true weights and noise sigma as JSON");
  sim_cmd->add_option("--seed", sim.seed, "Derive all scenario seeds from this seed");

  StudyOptions sweep, bench, control;
  auto add_study_flags = [](CLI::App* cmd, StudyOptions& o, bool required) {
    auto* study = cmd->add_option("--study", o.study, "Study JSON file or inline JSON");
    if (required) study->required();
    cmd->add_option("--output", o.output, "Output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Override the study's master seed");
  };
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a regime sweep over (n, d, R, SNR, lambda2)");
  add_study_flags(sweep_cmd, sweep, true);
  auto* bench_cmd = app.add_subcommand("bench", "Run any study described by a JSON file");
  add_study_flags(bench_cmd, bench, true);
  auto* control_cmd =
      app.add_subcommand("control", "Negative control: OLS on labels shuffled within replications");
  add_study_flags(control_cmd, control, false);
  control_cmd->add_option("--input", control.input, "CSV dataset (overrides the study input)");
  control_cmd->add_option("--label-col", control.label_col, "Name of the label column")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit_cmd) {
      run_fit(fit, out);
    } else if (*sim_cmd) {
      run_simulate(sim, out);
    } else if (*sweep_cmd) {
      run_study_command("sweep", sweep, out);
    } else if (*bench_cmd) {
      run_study_command("bench", bench, out);
    } else if (*control_cmd) {
      if (control.study.empty() && control.input.empty()) {
        throw UsageError("control requires --input or --study");
      }
      run_study_command("control", control, out);
    }
  } catch (const SingularSystemError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const OptimizationError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DegenerateMeanError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NoRealSolutionError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const CsvError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace shuffled::cli
