#include "shuffled/optim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "shuffled/parallel.hpp"
#include "shuffled/rng.hpp"

namespace shuffled {
namespace {

constexpr double kSufficientDecrease = 0.5;

double checked(const Objective& f, const WeightVector& w) {
  const double value = f(w);
  if (!std::isfinite(value)) throw NumericalError("objective is not finite at a gradient probe");
  return value;
}

struct CountingObjective {
  const Objective& f;
  std::uint64_t count = 0;
  double operator()(const WeightVector& w) {
    ++count;
    return f(w);
  }
};

}  // namespace

void FitConfig::validate() const {
  if (starts < 1) throw std::invalid_argument("starts must be >= 1");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(gradient_step > 0.0)) throw std::invalid_argument("gradient_step must be positive");
  if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be positive");
  if (max_halvings < 0) throw std::invalid_argument("max_halvings must be >= 0");
}

WeightVector numerical_gradient(const Objective& f, const WeightVector& w, double h) {
  WeightVector grad(w.size());
  WeightVector probe = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(w[i]));
    probe[i] = w[i] + step;
    const double up = checked(f, probe);
    probe[i] = w[i] - step;
    const double down = checked(f, probe);
    probe[i] = w[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

namespace {

StartRecord run_start(const Objective& f, std::size_t d, const FitConfig& cfg,
                      const Constraint& constraint, std::size_t index, std::uint64_t& evaluations) {
  CountingObjective counted{f};
  Objective counted_fn = [&counted](const WeightVector& w) { return counted(w); };

  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(index)));
  StartRecord rec;
  rec.weights.resize(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < rec.weights.size(); ++i) rec.weights[i] = cfg.init_scale * rng.normal();
  if (constraint) constraint(rec.weights);

  rec.loss = counted(rec.weights);
  if (!std::isfinite(rec.loss)) {
    rec.diverged = true;
    rec.loss = std::numeric_limits<double>::infinity();
    evaluations = counted.count;
    return rec;
  }
  if (cfg.record_trace) rec.loss_trace.push_back(rec.loss);

  for (rec.iterations = 0; rec.iterations < cfg.max_iters;) {
    WeightVector grad;
    try {
      grad = numerical_gradient(counted_fn, rec.weights, cfg.gradient_step);
    } catch (const NumericalError&) {
      break;  // keep the last finite iterate
    }
    ++rec.iterations;

    double t = cfg.step;
    bool accepted = false;
    WeightVector candidate;
    double candidate_loss = 0.0;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving, t *= 0.5) {
      candidate = rec.weights - t * grad;
      if (constraint) constraint(candidate);
      candidate_loss = counted(candidate);
      const double predicted = grad.dot(rec.weights - candidate);
      if (std::isfinite(candidate_loss) &&
          candidate_loss <= rec.loss - kSufficientDecrease * predicted) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rec.converged = true;
      break;
    }
    const double change = rec.loss - candidate_loss;
    rec.weights = std::move(candidate);
    rec.loss = candidate_loss;
    if (cfg.record_trace) rec.loss_trace.push_back(rec.loss);
    if (change < cfg.threshold) {
      rec.converged = true;
      break;
    }
  }
  evaluations = counted.count;
  return rec;
}

}  // namespace

FitResult multistart_descent(const Objective& f, std::size_t d, const FitConfig& cfg,
                             const Constraint& constraint) {
  cfg.validate();
  if (d < 1) throw std::invalid_argument("multistart_descent: dimension must be >= 1");
  const auto started = std::chrono::steady_clock::now();

  const auto starts = static_cast<std::size_t>(cfg.starts);
  std::vector<StartRecord> records(starts);
  std::vector<std::uint64_t> evaluations(starts, 0);
  parallel_for(starts, [&](std::size_t s) {
    records[s] = run_start(f, d, cfg, constraint, s, evaluations[s]);
  });

  FitResult result;
  std::size_t best = starts;
  for (std::size_t s = 0; s < starts; ++s) {
    result.iterations_per_start.push_back(records[s].iterations);
    result.converged.push_back(records[s].converged);
    result.evaluations += evaluations[s];
    if (cfg.record_trace) result.loss_traces.push_back(records[s].loss_trace);
    if (records[s].diverged) continue;
    if (best == starts || records[s].loss < records[best].loss) best = s;
  }
  if (best == starts) {
    throw OptimizationError("all " + std::to_string(starts) + " starts diverged",
                            std::move(records));
  }
  result.weights = records[best].weights;
  result.loss = records[best].loss;
  result.start_index = static_cast<int>(best);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace shuffled
