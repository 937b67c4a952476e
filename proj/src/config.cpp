#include "shuffled/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>

namespace shuffled {
namespace {

void require_object(const Json& j, std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

void allow_keys(const Json& j, std::string_view what, std::initializer_list<std::string_view> keys) {
  for (const auto& item : j.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + std::string(what));
    }
  }
}

template <typename T>
T get(const Json& j, const char* key, std::string_view what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(what) + "." + key + " has the wrong type");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, std::string_view what) {
  if (j.contains(key)) out = get<T>(j, key, what);
}

std::uint64_t read_seed(const Json& j, const char* key, std::uint64_t fallback,
                        std::string_view what) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(std::string(what) + "." + key + " must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

LossSpec loss_spec_from_json(const Json& j) {
  constexpr std::string_view what = "loss spec";
  require_object(j, what);
  allow_keys(j, what, {"kind", "K", "weights", "lambda2", "noise_moments", "small_d"});
  LossSpec spec;
  try {
    if (j.contains("kind")) spec.kind = parse_loss_kind(get<std::string>(j, "kind", what));
    if (j.contains("weights")) {
      const Json& w = j.at("weights");
      if (w.is_array()) {
        spec.weighting = MomentWeighting::custom;
        spec.custom_weights = get<std::vector<double>>(j, "weights", what);
      } else {
        spec.weighting = parse_moment_weighting(get<std::string>(j, "weights", what));
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  read(j, "K", spec.moment_order, what);
  read(j, "lambda2", spec.lambda2, what);
  read(j, "small_d", spec.small_d, what);
  if (j.contains("noise_moments") && !j.at("noise_moments").is_null()) {
    spec.noise_moments = get<std::vector<double>>(j, "noise_moments", what);
  }
  if (spec.moment_order < 0) throw ConfigError("loss spec K must be >= 1");
  if (!(spec.lambda2 >= 0.0)) throw ConfigError("loss spec lambda2 must be >= 0");
  if (spec.small_d < 0) throw ConfigError("loss spec small_d must be >= 1");
  return spec;
}

Json to_json(const LossSpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  if (spec.moment_order > 0) j["K"] = spec.moment_order;
  if (spec.weighting == MomentWeighting::custom) {
    j["weights"] = spec.custom_weights;
  } else {
    j["weights"] = std::string(to_string(spec.weighting));
  }
  j["lambda2"] = spec.lambda2;
  if (spec.noise_moments) j["noise_moments"] = *spec.noise_moments;
  if (spec.small_d > 0) j["small_d"] = spec.small_d;
  return j;
}

FitConfig fit_config_from_json(const Json& j) {
  constexpr std::string_view what = "fit config";
  require_object(j, what);
  allow_keys(j, what, {"starts", "step", "threshold", "max_iters", "gradient_step", "init_scale",
                       "seed", "max_halvings"});
  FitConfig cfg;
  read(j, "starts", cfg.starts, what);
  read(j, "step", cfg.step, what);
  read(j, "threshold", cfg.threshold, what);
  read(j, "max_iters", cfg.max_iters, what);
  read(j, "gradient_step", cfg.gradient_step, what);
  read(j, "init_scale", cfg.init_scale, what);
  read(j, "max_halvings", cfg.max_halvings, what);
  cfg.seed = read_seed(j, "seed", cfg.seed, what);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("fit config: ") + e.what());
  }
  return cfg;
}

Json to_json(const FitConfig& cfg) {
  return Json{{"starts", cfg.starts},          {"step", cfg.step},
              {"threshold", cfg.threshold},    {"max_iters", cfg.max_iters},
              {"gradient_step", cfg.gradient_step}, {"init_scale", cfg.init_scale},
              {"seed", cfg.seed},              {"max_halvings", cfg.max_halvings}};
}

NoiseSpec noise_from_json(const Json& j) {
  constexpr std::string_view what = "noise";
  require_object(j, what);
  allow_keys(j, what, {"sigma", "nsr_db", "snr_db"});
  if (j.size() != 1) throw ConfigError("noise must set exactly one of sigma, nsr_db, snr_db");
  try {
    if (j.contains("sigma")) return NoiseSpec::sigma(get<double>(j, "sigma", what));
    if (j.contains("nsr_db")) return NoiseSpec::nsr_db(get<double>(j, "nsr_db", what));
    return NoiseSpec::snr_db(get<double>(j, "snr_db", what));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Json to_json(const NoiseSpec& noise) {
  switch (noise.kind()) {
    case NoiseSpec::Kind::sigma: return Json{{"sigma", noise.value()}};
    case NoiseSpec::Kind::nsr_db: return Json{{"nsr_db", noise.value()}};
    case NoiseSpec::Kind::snr_db: return Json{{"snr_db", noise.value()}};
  }
  return Json{};
}

Scenario scenario_from_json(const Json& j) {
  constexpr std::string_view what = "scenario";
  require_object(j, what);
  allow_keys(j, what, {"n", "d", "means", "stds", "w0", "w0_seed", "noise", "design_seed",
                       "perm_seed", "noise_seed", "replications", "shuffle"});
  if (!j.contains("n")) throw ConfigError("scenario needs n");
  Scenario s;
  s.design.n = get<std::size_t>(j, "n", what);
  if (s.design.n < 1) throw ConfigError("scenario n must be >= 1");

  std::size_t d = 0;
  read(j, "d", d, what);
  auto column_values = [&](const char* key, double fallback) {
    if (!j.contains(key)) return std::vector<double>{fallback};
    if (j.at(key).is_array()) return get<std::vector<double>>(j, key, what);
    return std::vector<double>{get<double>(j, key, what)};
  };
  std::vector<double> means = column_values("means", 1.0);
  std::vector<double> stds = column_values("stds", 1.0);
  if (j.contains("w0")) s.w0 = get<std::vector<double>>(j, "w0", what);
  if (d == 0) {
    const bool listed = (j.contains("means") && j.at("means").is_array()) ||
                        (j.contains("stds") && j.at("stds").is_array()) || s.w0.has_value();
    if (!listed) throw ConfigError("scenario needs d, list-valued means/stds, or w0");
    d = std::max({means.size(), stds.size(), s.w0 ? s.w0->size() : std::size_t{0}});
  }
  if (means.size() == 1) means.assign(d, means[0]);
  if (stds.size() == 1) stds.assign(d, stds[0]);
  if (means.size() != d || stds.size() != d) {
    throw ConfigError("scenario means/stds do not match d = " + std::to_string(d));
  }
  for (double v : stds) {
    if (!(v >= 0.0)) throw ConfigError("scenario stds must be nonnegative");
  }
  if (s.w0 && s.w0->size() != d) throw ConfigError("scenario w0 does not match d");
  s.design.means = std::move(means);
  s.design.stds = std::move(stds);

  if (j.contains("noise")) s.noise = noise_from_json(j.at("noise"));
  s.design_seed = read_seed(j, "design_seed", s.design_seed, what);
  s.w0_seed = read_seed(j, "w0_seed", s.w0_seed, what);
  s.perm_seed = read_seed(j, "perm_seed", s.perm_seed, what);
  s.noise_seed = read_seed(j, "noise_seed", s.noise_seed, what);
  read(j, "replications", s.replications, what);
  read(j, "shuffle", s.shuffle, what);
  if (s.replications < 1 || s.replications > s.design.n) {
    throw ConfigError("scenario replications must lie in [1, n]");
  }
  return s;
}

Json to_json(const Scenario& s) {
  Json j{{"n", s.design.n},           {"d", s.design.dim()},
         {"means", s.design.means},   {"stds", s.design.stds},
         {"noise", to_json(s.noise)}, {"design_seed", s.design_seed},
         {"perm_seed", s.perm_seed},  {"noise_seed", s.noise_seed},
         {"replications", s.replications}, {"shuffle", s.shuffle}};
  if (s.w0) {
    j["w0"] = *s.w0;
  } else {
    j["w0_seed"] = s.w0_seed;
  }
  return j;
}

NamedEstimator estimator_from_json(const Json& j) {
  try {
    if (j.is_string()) return named_estimator(parse_estimator(j.get<std::string>()));
    constexpr std::string_view what = "estimator";
    require_object(j, what);
    allow_keys(j, what, {"name", "estimator", "loss", "fit"});
    if (!j.contains("estimator")) throw ConfigError("estimator entry needs 'estimator'");
    NamedEstimator e = named_estimator(parse_estimator(get<std::string>(j, "estimator", what)));
    read(j, "name", e.name, what);
    if (j.contains("loss")) e.choice.loss = loss_spec_from_json(j.at("loss"));
    if (j.contains("fit")) e.choice.fit = fit_config_from_json(j.at("fit"));
    return e;
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
}

}  // namespace shuffled
