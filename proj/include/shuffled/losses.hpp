#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shuffled/core.hpp"

namespace shuffled {

enum class LossKind { ls, sm, emd, ks, small_d };
enum class MomentWeighting { inverse_factorial, uniform, custom };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(MomentWeighting weighting);
MomentWeighting parse_moment_weighting(std::string_view name);

/// Which order-invariant loss to evaluate, and its parameters.
struct LossSpec {
  LossKind kind = LossKind::ls;
  /// Highest moment order K for the self-moment loss; 0 means "use d".
  int moment_order = 0;
  MomentWeighting weighting = MomentWeighting::inverse_factorial;
  /// f(1), f(2), ... when weighting == custom.
  std::vector<double> custom_weights;
  /// E[E^0] ... E[E^K] of the additive noise. Requires E[E^0] = 1, E[E^1] = 0.
  std::optional<std::vector<double>> noise_moments;
  /// L2 penalty lambda2 |w|^2, added for every loss kind.
  double lambda2 = 0.0;
  /// Number of smallest entries compared by the small-D loss; 0 means
  /// min(10, smallest replication).
  int small_d = 0;
};

/// Fills in K and D defaults for a dataset and validates the result.
/// Warnings (such as K < d with a single replication) are appended to
/// `warnings` when given.
LossSpec resolve_loss_spec(LossSpec spec, const Dataset& ds,
                           std::vector<std::string>* warnings = nullptr);

/// (1/n) sum v_i^k.
double sample_moment(std::span<const double> v, int k);

/// f(k) for the self-moment loss. Throws std::invalid_argument when a custom
/// list has fewer than k entries.
double moment_weight(int k, MomentWeighting weighting, std::span<const double> custom = {});

/// Moment vector E[E^0..E^order] of N(0, sigma^2) noise.
std::vector<double> gaussian_noise_moments(double sigma, int order);

// Distances between two sorted samples. These are the per-replication
// building blocks of the losses below.

/// sum_i (a_i - b_i)^2 over equal-length sorted inputs.
double sorted_squared_distance(std::span<const double> a, std::span<const double> b);
/// Squared distance between the `count` smallest entries of each input.
double smallest_squared_distance(std::span<const double> a, std::span<const double> b,
                                 std::size_t count);
/// 1-D earth mover's distance, integral |F_a - F_b|, for any sample sizes.
double emd_sorted(std::span<const double> a, std::span<const double> b);
/// Equal-size shortcut: (1/m) sum_i |a_i - b_i|. Identical to emd_sorted.
double emd_sorted_equal(std::span<const double> a, std::span<const double> b);
/// Two-sample Kolmogorov-Smirnov statistic sup_t |F_a(t) - F_b(t)|.
double ks_sorted(std::span<const double> a, std::span<const double> b);

/// A loss L(x, y, w) bound to one dataset.
///
/// Sorted labels and label moments are computed once per replication at
/// construction. Evaluation allocates its own scratch space and is safe to
/// call from several threads at once. Replication terms are summed in
/// replication-id order with equal weight.
class OrderInvariantLoss {
 public:
  OrderInvariantLoss(const Dataset& ds, LossSpec spec);

  double operator()(const WeightVector& w) const;
  /// Data term for predictions x w (no regularization).
  double data_term(const Vector& predictions) const;

  const LossSpec& spec() const { return spec_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }

 private:
  double sm_term(std::span<const double> predictions, std::size_t group) const;
  double sorted_term(std::vector<double>& predictions, std::size_t group) const;

  // Declared before spec_: the constructor fills it while resolving the spec.
  std::vector<std::string> warnings_;
  LossSpec spec_;
  Matrix features_;
  std::vector<std::vector<std::size_t>> groups_;
  bool single_group_ = true;
  std::vector<std::vector<double>> sorted_labels_;
  std::vector<std::vector<double>> label_moments_;  // N_{r,k}, k = 0..K
  std::vector<double> moment_weights_;              // f(k), k = 0..K (f(0) unused)
  std::vector<std::vector<double>> binomial_;
};

double ls_loss(const Dataset& ds, const WeightVector& w, double lambda2 = 0.0);
double sm_loss(const Dataset& ds, const WeightVector& w, const LossSpec& spec);
double emd_loss(const Dataset& ds, const WeightVector& w, double lambda2 = 0.0);
double ks_loss(const Dataset& ds, const WeightVector& w, double lambda2 = 0.0);
/// Throws std::invalid_argument unless 1 <= count <= smallest replication.
double small_d_loss(const Dataset& ds, const WeightVector& w, int count, double lambda2 = 0.0);

}  // namespace shuffled
