#include "shuffled/study.hpp"

#include <algorithm>
#include <fstream>

#include "shuffled/csv.hpp"

namespace shuffled {
namespace {

constexpr const char* kVersion = "1.0.0";

void allow_keys(const Json& j, const std::string& kind, std::initializer_list<std::string_view> keys) {
  for (const auto& item : j.items()) {
    if (item.key() == "study" || item.key() == "figure") continue;
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + kind + " study");
    }
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("study key '") + key + "' has the wrong type");
  }
}

void read_seed(const Json& j, std::uint64_t& seed) {
  if (!j.contains("seed")) return;
  if (!j.at("seed").is_number_unsigned()) throw ConfigError("study seed must be a nonnegative integer");
  seed = j.at("seed").get<std::uint64_t>();
}

std::vector<NamedEstimator> read_estimators(const Json& j) {
  std::vector<NamedEstimator> out;
  if (!j.contains("estimators")) return out;
  if (!j.at("estimators").is_array()) throw ConfigError("study estimators must be a list");
  for (const auto& e : j.at("estimators")) out.push_back(estimator_from_json(e));
  return out;
}

Dataset load_dataset(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.contains("input")) throw ConfigError("study needs 'input' (a CSV path)");
  std::filesystem::path path = j.at("input").get<std::string>();
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  CsvOptions options;
  read(j, "label_col", options.label_column);
  return read_csv(path, options).dataset;
}

}  // namespace

StudyOutput run_study(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("study") || !j.at("study").is_string()) {
    throw ConfigError("study config must be an object with a string 'study' field");
  }
  StudyOutput out;
  out.kind = j.at("study").get<std::string>();

  if (out.kind == "sweep") {
    allow_keys(j, out.kind, {"n_values", "d_values", "replication_values", "points_per_replication",
                             "snr_db_values", "lambda2_values", "trials", "estimators", "seed",
                             "design_mean", "design_std", "tie_margin"});
    SweepGrid g;
    read(j, "n_values", g.n_values);
    read(j, "d_values", g.d_values);
    read(j, "replication_values", g.replication_values);
    read(j, "points_per_replication", g.points_per_replication);
    read(j, "snr_db_values", g.snr_db_values);
    read(j, "lambda2_values", g.lambda2_values);
    read(j, "trials", g.trials);
    read(j, "design_mean", g.design_mean);
    read(j, "design_std", g.design_std);
    read(j, "tie_margin", g.tie_margin);
    read_seed(j, g.seed);
    g.estimators = read_estimators(j);
    if (g.estimators.empty()) {
      g.estimators = {named_estimator(EstimatorKind::sm), named_estimator(EstimatorKind::p1)};
    }
    const auto cells = run_sweep(g);
    out.results = sweep_table(cells);
    out.figure_table = winner_map(cells);
    out.figure = g.points_per_replication ? "fig6" : "fig4";
  } else if (out.kind == "consistency") {
    allow_keys(j, out.kind, {"w0", "n_values", "sigma_e", "trials", "seed", "design_mean",
                             "design_std", "estimators"});
    ConsistencyStudy s;
    read(j, "w0", s.w0);
    read(j, "n_values", s.n_values);
    read(j, "sigma_e", s.sigma_e);
    read(j, "trials", s.trials);
    read(j, "design_mean", s.design_mean);
    read(j, "design_std", s.design_std);
    read_seed(j, s.seed);
    s.estimators = read_estimators(j);
    if (s.estimators.empty()) {
      s.estimators = {named_estimator(EstimatorKind::ols), named_estimator(EstimatorKind::ls),
                      named_estimator(EstimatorKind::sm)};
    }
    out.results = consistency_table(consistency_curve(s));
    out.figure_table = out.results;
    out.figure = s.w0.size() == 1 ? "fig2" : "fig3";
  } else if (out.kind == "replication") {
    allow_keys(j, out.kind, {"n", "w0", "nsr_db", "replications", "trials", "seed", "design_mean",
                             "design_std", "estimator"});
    ReplicationStudy s;
    read(j, "n", s.n);
    read(j, "w0", s.w0);
    read(j, "nsr_db", s.nsr_db);
    read(j, "replications", s.replications);
    read(j, "trials", s.trials);
    read(j, "design_mean", s.design_mean);
    read(j, "design_std", s.design_std);
    read_seed(j, s.seed);
    if (j.contains("estimator")) s.estimator = estimator_from_json(j.at("estimator")).choice;
    out.results = replication_table(replication_curve(s));
    out.figure_table = out.results;
    out.figure = "fig5";
  } else if (out.kind == "noise_adjustment") {
    allow_keys(j, out.kind, {"n", "w0", "nsr_db", "trials", "seed", "design_mean", "design_std",
                             "fit"});
    NoiseAdjustmentStudy s;
    read(j, "n", s.n);
    read(j, "w0", s.w0);
    read(j, "nsr_db", s.nsr_db);
    read(j, "trials", s.trials);
    read(j, "design_mean", s.design_mean);
    read(j, "design_std", s.design_std);
    read_seed(j, s.seed);
    if (j.contains("fit")) s.fit = fit_config_from_json(j.at("fit"));
    out.results = noise_adjustment_table(noise_adjustment_study(s));
    out.figure_table = out.results;
    out.figure = "fig7";
  } else if (out.kind == "regularization") {
    allow_keys(j, out.kind, {"n", "sparsity", "lambda2", "trials", "seed", "sigma_e",
                             "design_mean", "design_std", "loss", "fit"});
    RegularizationStudy s;
    read(j, "n", s.n);
    read(j, "sparsity", s.sparsity);
    read(j, "lambda2", s.lambda2);
    read(j, "trials", s.trials);
    read(j, "sigma_e", s.sigma_e);
    read(j, "design_mean", s.design_mean);
    read(j, "design_std", s.design_std);
    read_seed(j, s.seed);
    if (j.contains("loss")) s.loss = loss_spec_from_json(j.at("loss"));
    if (j.contains("fit")) s.fit = fit_config_from_json(j.at("fit"));
    out.results = regularization_table(regularization_study(s));
    out.figure_table = out.results;
    out.figure = "fig8";
  } else if (out.kind == "protocol" || out.kind == "control") {
    allow_keys(j, out.kind, {"input", "label_col", "replications", "trials", "seed", "normalize",
                             "estimator"});
    ProtocolConfig cfg;
    read(j, "replications", cfg.replications);
    read(j, "trials", cfg.trials);
    read(j, "normalize", cfg.normalize);
    read_seed(j, cfg.seed);
    if (j.contains("estimator")) cfg.estimator = estimator_from_json(j.at("estimator")).choice;
    const Dataset ds = load_dataset(j, base_dir);
    const ProtocolResult result = out.kind == "protocol" ? standard_dataset_protocol(ds, cfg)
                                                         : negative_control(ds, cfg);
    out.results = protocol_table(result);
    out.figure_table = out.results;
    out.figure = out.kind == "protocol" ? "table2" : "table4";
  } else {
    throw ConfigError("unknown study '" + out.kind +
                      "'; valid studies: sweep, consistency, replication, noise_adjustment, "
                      "regularization, protocol, control");
  }

  if (j.contains("figure")) read(j, "figure", out.figure);
  out.manifest = Json{{"study", out.kind},
                      {"config", j},
                      {"files", Json::array({"results.csv", out.figure + ".csv"})},
                      {"version", kVersion},
                      {"rng", "mt19937_64 streams keyed by splitmix64(seed, tag)"}};
  return out;
}

void write_study(const StudyOutput& output, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::filesystem::path& name, const std::string& text) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
    f << text;
  };
  write("results.csv", output.results.to_csv());
  write(output.figure + ".csv", output.figure_table.to_csv());
  write("manifest.json", output.manifest.dump(2) + "\n");
}

}  // namespace shuffled
