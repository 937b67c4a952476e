#pragma once

#include <json.hpp>

#include "shuffled/bench.hpp"
#include "shuffled/estimators.hpp"
#include "shuffled/synth.hpp"

namespace shuffled {

using Json = nlohmann::json;

/// Malformed configuration: wrong type, unknown key or out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loss spec:
//   {"kind": "sm", "K": 4, "weights": "inverse_factorial" | "uniform" | [f1, f2, ...],
//    "lambda2": 0.0, "noise_moments": [1, 0, s2, ...], "small_d": 10}
LossSpec loss_spec_from_json(const Json& j);
Json to_json(const LossSpec& spec);

// Fit config: {"starts", "step", "threshold", "max_iters", "gradient_step",
//              "init_scale", "seed", "max_halvings"}; every key optional.
FitConfig fit_config_from_json(const Json& j);
Json to_json(const FitConfig& cfg);

NoiseSpec noise_from_json(const Json& j);  ///< exactly one of sigma, nsr_db, snr_db
Json to_json(const NoiseSpec& noise);

// Scenario: {"n", "d", "means", "stds", "w0" | "w0_seed", "noise": {...},
//            "design_seed", "perm_seed", "noise_seed", "replications", "shuffle"}.
// Scalar means/stds are broadcast to d columns; with lists, d may be omitted.
Scenario scenario_from_json(const Json& j);
Json to_json(const Scenario& scenario);

/// "sm" or {"name": ..., "estimator": "p1", "loss": {...}, "fit": {...}}.
NamedEstimator estimator_from_json(const Json& j);

}  // namespace shuffled
