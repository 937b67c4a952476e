#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shuffled {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using WeightVector = Eigen::VectorXd;

/// Raised when a linear system has no unique solution.
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a computation produces a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Features, labels and replication assignment of one regression problem.
///
/// Rows of `features` are samples. Replication ids are dense: every id in
/// [0, R) occurs at least once. Instances are immutable; the transformation
/// functions below return new datasets.
class Dataset {
 public:
  /// Single replication.
  Dataset(Matrix features, Vector labels);
  /// Throws std::invalid_argument if any invariant is violated.
  Dataset(Matrix features, Vector labels, std::vector<int> replication_ids);

  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  const std::vector<int>& replication_ids() const { return replication_ids_; }

  std::size_t size() const { return static_cast<std::size_t>(labels_.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t replication_count() const { return groups_.size(); }

  /// Row indices of each replication, ascending within a group.
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
  std::size_t min_group_size() const;

  Dataset with_labels(Vector labels) const;
  Dataset with_replications(std::vector<int> replication_ids) const;

 private:
  Matrix features_;
  Vector labels_;
  std::vector<int> replication_ids_;
  std::vector<std::vector<std::size_t>> groups_;
};

/// Affine map applied to one column: normalized = (raw - offset) / scale.
struct ColumnScaling {
  double offset = 0.0;
  double scale = 1.0;
  bool constant = false;
};

struct NormalizedDataset {
  Dataset dataset;
  std::vector<ColumnScaling> feature_scaling;
  ColumnScaling label_scaling;
};

/// Spread below which a column counts as constant and is left untouched.
inline constexpr double kConstantColumnSpread = 1e-12;

/// Maps each non-constant feature column and the labels onto [0, 1].
NormalizedDataset normalize_minmax(const Dataset& ds);

/// Balanced random split into `replications` groups (sizes differ by at most
/// one). Throws std::invalid_argument unless 1 <= replications <= n.
Dataset partition_replications(const Dataset& ds, std::size_t replications, std::uint64_t seed);

/// Permutes labels uniformly at random inside each replication.
Dataset shuffle_within_replications(const Dataset& ds, std::uint64_t seed);

/// |w_hat - w_ref|_2 / |w_ref|_2.
double relative_error(const WeightVector& w_hat, const WeightVector& w_ref);

/// Ordinary least squares on the rows as given. Throws SingularSystemError
/// when the features are rank deficient.
WeightVector ols_fit(const Dataset& ds);

/// Goodness of an ordered OLS fit: R^2 and residual standard deviation.
struct FitQuality {
  double r_squared = 0.0;
  double residual_std = 0.0;
};
FitQuality ols_quality(const Dataset& ds);

struct EvalReport {
  std::string estimator;
  double relative_error = 0.0;
  double final_loss = 0.0;
  std::size_t trials = 0;
  std::vector<double> per_trial_errors;

  static EvalReport from_trials(std::string estimator, std::vector<double> errors,
                                double final_loss);
};

}  // namespace shuffled
