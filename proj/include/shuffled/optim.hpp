#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "shuffled/core.hpp"

namespace shuffled {

/// A scalar loss of the weights. Must be safe to call concurrently.
using Objective = std::function<double(const WeightVector&)>;

/// Optional map applied to every iterate, e.g. renormalizing a projection.
using Constraint = std::function<void(WeightVector&)>;

struct FitConfig {
  int starts = 10;
  double step = 0.1;
  double threshold = 1e-6;
  int max_iters = 10000;
  double gradient_step = 1e-6;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  /// Step halvings tried per iteration before the start is declared stationary.
  int max_halvings = 60;
  bool record_trace = false;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

struct StartRecord {
  WeightVector weights;
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  std::vector<double> loss_trace;
};

struct FitResult {
  WeightVector weights;
  double loss = 0.0;
  int start_index = 0;
  std::vector<int> iterations_per_start;
  std::vector<bool> converged;
  std::vector<std::vector<double>> loss_traces;  ///< empty unless record_trace
  /// Objective evaluations across all starts; a deterministic cost measure.
  std::uint64_t evaluations = 0;
  double seconds = 0.0;
};

/// Every start produced a non-finite loss.
class OptimizationError : public std::runtime_error {
 public:
  OptimizationError(const std::string& message, std::vector<StartRecord> starts)
      : std::runtime_error(message), starts_(std::move(starts)) {}
  const std::vector<StartRecord>& starts() const { return starts_; }

 private:
  std::vector<StartRecord> starts_;
};

/// Central differences with per-coordinate step h * max(1, |w_i|).
/// Throws NumericalError when the objective is not finite at a probe point.
WeightVector numerical_gradient(const Objective& f, const WeightVector& w, double h);

/// Multi-start gradient descent with step-halving backtracking.
///
/// Each start draws w ~ N(0, init_scale^2 I) from its own stream
/// (derive_seed(seed, start)), then repeats w <- w - t grad f(w). Every
/// iteration begins at t = step and halves t until the loss drops by at least
/// half the first-order prediction, t * |grad|^2 (Armijo with c = 1/2). The
/// start stops when the decrease falls below `threshold`, when no halving
/// succeeds (stationary), or after max_iters (converged = false).
///
/// Starts run in parallel; the best final loss wins, ties going to the lowest
/// start index, so results do not depend on scheduling.
FitResult multistart_descent(const Objective& f, std::size_t d, const FitConfig& cfg,
                             const Constraint& constraint = {});

}  // namespace shuffled
