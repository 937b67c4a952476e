#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "shuffled/core.hpp"
#include "shuffled/losses.hpp"
#include "shuffled/optim.hpp"

namespace shuffled {

/// The design mean needed by a self-moment closed form is (numerically) zero.
class DegenerateMeanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The two-moment quadratic has a negative discriminant.
class NoRealSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EstimatorKind { ols, sm, ls, p1, p2, emd, ks, small_d, automatic };

std::string_view to_string(EstimatorKind kind);
/// Throws std::invalid_argument naming the valid choices.
EstimatorKind parse_estimator(std::string_view name);
std::string estimator_names();

struct EstimatorChoice {
  EstimatorKind kind = EstimatorKind::automatic;
  LossSpec loss;
  FitConfig fit;
};

struct Candidate {
  WeightVector weights;
  double loss = 0.0;  ///< disambiguation loss (sorted least squares)
};
using CandidateSet = std::vector<Candidate>;

/// |sum| at or below this is treated as zero: 1e-12 * n.
double degenerate_sum_threshold(std::size_t n);

/// sum(y) / sum(x) for d = 1. Throws DegenerateMeanError when sum(x) ~ 0.
WeightVector sm_d1(const Dataset& ds);

/// Real solutions (w1, w2) of the first- and second-moment equations for a
/// two-column design, with E[y^2] reduced by `noise_variance` when given.
/// Swaps columns when the first column has zero mean.
std::vector<Eigen::Vector2d> sm_d2_roots(const Matrix& x, const Vector& y,
                                         std::optional<double> noise_variance = {});

/// Both roots of the two-moment system, sorted by ascending sorted-least-
/// squares loss on `ds`.
CandidateSet sm_d2_analytic(const Dataset& ds, std::optional<double> noise_variance = {});

/// Selection rule for Auto: SM when d <= 2 or R >= 3d, otherwise P1.
EstimatorKind resolve_auto(std::size_t d, std::size_t replications);

struct ProjectionOptions {
  double lambda2 = 0.0;
  std::optional<double> noise_variance;  ///< used by the two-dimensional inner solve
};

/// Hybrid projection estimator. Searches unit-norm d x d_p projections p by
/// multi-start descent; each p is scored by the sorted least-squares loss of
/// p * w~(p), where w~ is the closed-form self-moment solution on x p.
/// Projections where the closed form is undefined score +infinity.
FitResult projection_estimate(const Dataset& ds, int projection_dim, const FitConfig& cfg,
                              const ProjectionOptions& options = {});

/// Weights embedded from one projection (d_p = 1 or 2), or nullopt when the
/// inner closed form is undefined. Exposed for testing.
std::optional<WeightVector> projection_weights(const Dataset& ds, const Matrix& projection,
                                               std::optional<double> noise_variance = {});

struct Estimate {
  FitResult fit;
  EstimatorKind resolved = EstimatorKind::automatic;
  std::string method;  ///< "closed_form", "multistart" or "projection"
  std::vector<std::string> warnings;
  CandidateSet candidates;  ///< filled by the two-moment closed form
};

Estimate estimate(const Dataset& ds, const EstimatorChoice& choice);

}  // namespace shuffled
