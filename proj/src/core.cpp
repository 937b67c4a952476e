#include "shuffled/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shuffled/rng.hpp"

namespace shuffled {
namespace {

std::vector<std::vector<std::size_t>> build_groups(const std::vector<int>& ids, std::size_t n) {
  if (ids.size() != n) {
    throw std::invalid_argument("replication_ids length " + std::to_string(ids.size()) +
                                " does not match sample count " + std::to_string(n));
  }
  int max_id = -1;
  for (int id : ids) {
    if (id < 0) throw std::invalid_argument("replication ids must be nonnegative");
    max_id = std::max(max_id, id);
  }
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(max_id + 1));
  for (std::size_t i = 0; i < n; ++i) groups[static_cast<std::size_t>(ids[i])].push_back(i);
  for (std::size_t r = 0; r < groups.size(); ++r) {
    if (groups[r].empty()) {
      throw std::invalid_argument("replication id " + std::to_string(r) +
                                  " has no samples; ids must cover [0, R)");
    }
  }
  return groups;
}

}  // namespace

Dataset::Dataset(Matrix features, Vector labels)
    : Dataset(std::move(features), labels,
              std::vector<int>(static_cast<std::size_t>(labels.size()), 0)) {}

Dataset::Dataset(Matrix features, Vector labels, std::vector<int> replication_ids)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      replication_ids_(std::move(replication_ids)) {
  if (labels_.size() < 1) throw std::invalid_argument("dataset needs at least one sample");
  if (features_.rows() != labels_.size()) {
    throw std::invalid_argument("feature rows (" + std::to_string(features_.rows()) +
                                ") differ from label count (" + std::to_string(labels_.size()) +
                                ")");
  }
  if (features_.cols() < 1) throw std::invalid_argument("dataset needs at least one feature");
  if (!features_.allFinite() || !labels_.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite values");
  }
  groups_ = build_groups(replication_ids_, size());
}

std::size_t Dataset::min_group_size() const {
  std::size_t smallest = size();
  for (const auto& g : groups_) smallest = std::min(smallest, g.size());
  return smallest;
}

Dataset Dataset::with_labels(Vector labels) const {
  return Dataset(features_, std::move(labels), replication_ids_);
}

Dataset Dataset::with_replications(std::vector<int> replication_ids) const {
  return Dataset(features_, labels_, std::move(replication_ids));
}

namespace {

ColumnScaling scale_column(Eigen::Ref<Vector> column) {
  const double lo = column.minCoeff();
  const double hi = column.maxCoeff();
  ColumnScaling s;
  if (hi - lo < kConstantColumnSpread) {
    s.constant = true;
    return s;
  }
  s.offset = lo;
  s.scale = hi - lo;
  column = (column.array() - lo) / s.scale;
  // Pin the endpoints so the map is exactly idempotent.
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    column[i] = std::clamp(column[i], 0.0, 1.0);
  }
  return s;
}

}  // namespace

NormalizedDataset normalize_minmax(const Dataset& ds) {
  if (ds.size() < 2) throw std::invalid_argument("normalize_minmax needs at least two samples");
  Matrix x = ds.features();
  Vector y = ds.labels();
  std::vector<ColumnScaling> feature_scaling;
  feature_scaling.reserve(ds.dim());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Vector col = x.col(j);
    feature_scaling.push_back(scale_column(col));
    x.col(j) = col;
  }
  ColumnScaling label_scaling = scale_column(y);
  return {Dataset(std::move(x), std::move(y), ds.replication_ids()), std::move(feature_scaling),
          label_scaling};
}

Dataset partition_replications(const Dataset& ds, std::size_t replications, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (replications < 1 || replications > n) {
    throw std::invalid_argument("replication count " + std::to_string(replications) +
                                " must lie in [1, " + std::to_string(n) + "]");
  }
  // Round-robin labels give balanced sizes; a uniform shuffle of them makes
  // the assignment uniformly random among balanced partitions.
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i % replications);
  Rng rng(derive_seed(seed, "partition"));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(ids[i - 1], ids[rng.below(i)]);
  }
  return ds.with_replications(std::move(ids));
}

Dataset shuffle_within_replications(const Dataset& ds, std::uint64_t seed) {
  Vector y = ds.labels();
  Rng rng(derive_seed(seed, "shuffle"));
  for (const auto& group : ds.groups()) {
    for (std::size_t i = group.size(); i > 1; --i) {
      const std::size_t j = rng.below(i);
      std::swap(y[static_cast<Eigen::Index>(group[i - 1])], y[static_cast<Eigen::Index>(group[j])]);
    }
  }
  return ds.with_labels(std::move(y));
}

double relative_error(const WeightVector& w_hat, const WeightVector& w_ref) {
  if (w_hat.size() != w_ref.size()) {
    throw std::invalid_argument("relative_error: length mismatch");
  }
  const double ref_norm = w_ref.norm();
  if (!(ref_norm > 0.0)) throw std::invalid_argument("relative_error: reference has zero norm");
  return (w_hat - w_ref).norm() / ref_norm;
}

WeightVector ols_fit(const Dataset& ds) {
  const Matrix& x = ds.features();
  if (x.rows() < x.cols()) {
    throw SingularSystemError("ols_fit: fewer samples than features");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-12);
  if (qr.rank() < x.cols()) {
    throw SingularSystemError("ols_fit: features are rank deficient (rank " +
                              std::to_string(qr.rank()) + " < " + std::to_string(x.cols()) + ")");
  }
  return qr.solve(ds.labels());
}

FitQuality ols_quality(const Dataset& ds) {
  const WeightVector w = ols_fit(ds);
  const Vector residual = ds.labels() - ds.features() * w;
  const double n = static_cast<double>(ds.size());
  const double mean = ds.labels().mean();
  const double total = (ds.labels().array() - mean).square().sum();
  FitQuality q;
  q.r_squared = total > 0.0 ? 1.0 - residual.squaredNorm() / total : 1.0;
  const double rmean = residual.mean();
  q.residual_std = std::sqrt((residual.array() - rmean).square().sum() / n);
  return q;
}

EvalReport EvalReport::from_trials(std::string estimator, std::vector<double> errors,
                                   double final_loss) {
  EvalReport r;
  r.estimator = std::move(estimator);
  r.trials = errors.size();
  r.relative_error =
      errors.empty() ? 0.0
                     : std::accumulate(errors.begin(), errors.end(), 0.0) /
                           static_cast<double>(errors.size());
  r.final_loss = final_loss;
  r.per_trial_errors = std::move(errors);
  return r;
}

}  // namespace shuffled
