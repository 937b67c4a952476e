#include "shuffled/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shuffled {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::ls: return "ls";
    case LossKind::sm: return "sm";
    case LossKind::emd: return "emd";
    case LossKind::ks: return "ks";
    case LossKind::small_d: return "smalld";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "ls") return LossKind::ls;
  if (name == "sm") return LossKind::sm;
  if (name == "emd") return LossKind::emd;
  if (name == "ks") return LossKind::ks;
  if (name == "smalld" || name == "small_d") return LossKind::small_d;
  throw std::invalid_argument("unknown loss kind '" + std::string(name) +
                              "' (expected ls, sm, emd, ks or smalld)");
}

std::string_view to_string(MomentWeighting weighting) {
  switch (weighting) {
    case MomentWeighting::inverse_factorial: return "inverse_factorial";
    case MomentWeighting::uniform: return "uniform";
    case MomentWeighting::custom: return "custom";
  }
  return "?";
}

MomentWeighting parse_moment_weighting(std::string_view name) {
  if (name == "inverse_factorial") return MomentWeighting::inverse_factorial;
  if (name == "uniform") return MomentWeighting::uniform;
  if (name == "custom") return MomentWeighting::custom;
  throw std::invalid_argument("unknown moment weighting '" + std::string(name) + "'");
}

LossSpec resolve_loss_spec(LossSpec spec, const Dataset& ds, std::vector<std::string>* warnings) {
  const int d = static_cast<int>(ds.dim());
  if (spec.moment_order < 0) throw std::invalid_argument("moment order K must be >= 1");
  if (spec.moment_order == 0) spec.moment_order = d;
  if (!(spec.lambda2 >= 0.0)) throw std::invalid_argument("lambda2 must be nonnegative");

  if (spec.kind == LossKind::sm) {
    if (spec.weighting == MomentWeighting::custom &&
        spec.custom_weights.size() < static_cast<std::size_t>(spec.moment_order)) {
      throw std::invalid_argument("custom moment weights list shorter than K");
    }
    if (spec.noise_moments) {
      const auto& m = *spec.noise_moments;
      if (m.size() != static_cast<std::size_t>(spec.moment_order) + 1) {
        throw std::invalid_argument("noise_moments must have K+1 entries");
      }
      if (std::abs(m[0] - 1.0) > 1e-12 || (m.size() > 1 && std::abs(m[1]) > 1e-12)) {
        throw std::invalid_argument("noise_moments must start with E[E^0]=1, E[E^1]=0");
      }
    }
    if (warnings && ds.replication_count() == 1 && spec.moment_order < d) {
      warnings->push_back("moment order K=" + std::to_string(spec.moment_order) +
                          " is below d=" + std::to_string(d) +
                          "; weights are not identifiable from one replication");
    }
  }
  if (spec.kind == LossKind::small_d) {
    const auto smallest = static_cast<int>(ds.min_group_size());
    if (spec.small_d == 0) spec.small_d = std::min(10, smallest);
    if (spec.small_d < 1 || spec.small_d > smallest) {
      throw std::invalid_argument("small-D count " + std::to_string(spec.small_d) +
                                  " outside [1, " + std::to_string(smallest) + "]");
    }
  }
  return spec;
}

double sample_moment(std::span<const double> v, int k) {
  if (v.empty()) throw std::invalid_argument("sample_moment of empty vector");
  if (k < 0) throw std::invalid_argument("sample_moment order must be >= 0");
  if (k == 0) return 1.0;
  double sum = 0.0;
  for (double x : v) sum += std::pow(x, k);
  return sum / static_cast<double>(v.size());
}

double moment_weight(int k, MomentWeighting weighting, std::span<const double> custom) {
  if (k < 1) throw std::invalid_argument("moment weight order must be >= 1");
  switch (weighting) {
    case MomentWeighting::inverse_factorial: {
      double f = 1.0;
      for (int i = 2; i <= k; ++i) f /= i;
      return f;
    }
    case MomentWeighting::uniform:
      return 1.0;
    case MomentWeighting::custom:
      if (custom.size() < static_cast<std::size_t>(k)) {
        throw std::invalid_argument("custom moment weights have " + std::to_string(custom.size()) +
                                    " entries, need f(" + std::to_string(k) + ")");
      }
      return custom[static_cast<std::size_t>(k) - 1];
  }
  return 1.0;
}

std::vector<double> gaussian_noise_moments(double sigma, int order) {
  // E[E^k] = sigma^k (k-1)!! for even k, 0 for odd k.
  std::vector<double> m(static_cast<std::size_t>(order) + 1, 0.0);
  m[0] = 1.0;
  for (int k = 2; k <= order; k += 2) {
    m[static_cast<std::size_t>(k)] = m[static_cast<std::size_t>(k) - 2] * sigma * sigma * (k - 1);
  }
  return m;
}

double sorted_squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sorted_squared_distance: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

double smallest_squared_distance(std::span<const double> a, std::span<const double> b,
                                 std::size_t count) {
  if (count > a.size() || count > b.size()) {
    throw std::invalid_argument("smallest_squared_distance: count exceeds sample size");
  }
  return sorted_squared_distance(a.first(count), b.first(count));
}

double emd_sorted_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("emd_sorted_equal: needs equal nonempty sizes");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double emd_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("emd_sorted: empty sample");
  const double m = static_cast<double>(a.size());
  const double n = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double previous = std::min(a[0], b[0]);
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    const double t = j >= b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
    total += std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n) * (t - previous);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    previous = t;
  }
  return total;
}

double ks_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_sorted: empty sample");
  const double m = static_cast<double>(a.size());
  const double n = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n));
  }
  return sup;
}

OrderInvariantLoss::OrderInvariantLoss(const Dataset& ds, LossSpec spec)
    : spec_(resolve_loss_spec(std::move(spec), ds, &warnings_)),
      features_(ds.features()),
      groups_(ds.groups()),
      single_group_(ds.replication_count() == 1) {
  const Vector& y = ds.labels();
  sorted_labels_.reserve(groups_.size());
  for (const auto& group : groups_) {
    std::vector<double> labels;
    labels.reserve(group.size());
    for (std::size_t i : group) labels.push_back(y[static_cast<Eigen::Index>(i)]);
    std::sort(labels.begin(), labels.end());
    sorted_labels_.push_back(std::move(labels));
  }

  if (spec_.kind == LossKind::sm) {
    const auto order = static_cast<std::size_t>(spec_.moment_order);
    moment_weights_.assign(order + 1, 0.0);
    for (std::size_t k = 1; k <= order; ++k) {
      moment_weights_[k] = moment_weight(static_cast<int>(k), spec_.weighting, spec_.custom_weights);
    }
    for (const auto& labels : sorted_labels_) {
      std::vector<double> sums(order + 1, 0.0);
      for (double v : labels) {
        double power = 1.0;
        for (std::size_t k = 0; k <= order; ++k) {
          sums[k] += power;
          power *= v;
        }
      }
      for (double& s : sums) s /= static_cast<double>(labels.size());
      label_moments_.push_back(std::move(sums));
    }
    binomial_.assign(order + 1, std::vector<double>(order + 1, 0.0));
    for (std::size_t k = 0; k <= order; ++k) {
      binomial_[k][0] = 1.0;
      for (std::size_t j = 1; j <= k; ++j) {
        binomial_[k][j] = binomial_[k - 1][j - 1] + (j < k ? binomial_[k - 1][j] : 0.0);
      }
    }
  }
}

double OrderInvariantLoss::operator()(const WeightVector& w) const {
  if (w.size() != features_.cols()) {
    throw std::invalid_argument("loss: weight length " + std::to_string(w.size()) +
                                " does not match dimension " + std::to_string(features_.cols()));
  }
  const Vector predictions = features_ * w;
  return data_term(predictions) + spec_.lambda2 * w.squaredNorm();
}

double OrderInvariantLoss::data_term(const Vector& predictions) const {
  double total = 0.0;
  std::vector<double> buffer;
  for (std::size_t r = 0; r < groups_.size(); ++r) {
    if (single_group_) {
      buffer.assign(predictions.data(), predictions.data() + predictions.size());
    } else {
      buffer.clear();
      for (std::size_t i : groups_[r]) buffer.push_back(predictions[static_cast<Eigen::Index>(i)]);
    }
    total += spec_.kind == LossKind::sm ? sm_term(buffer, r) : sorted_term(buffer, r);
  }
  return total;
}

double OrderInvariantLoss::sm_term(std::span<const double> predictions, std::size_t group) const {
  const auto order = static_cast<std::size_t>(spec_.moment_order);
  std::vector<double> power_means(order + 1, 0.0);
  for (double v : predictions) {
    double power = 1.0;
    for (std::size_t k = 0; k <= order; ++k) {
      power_means[k] += power;
      power *= v;
    }
  }
  for (double& s : power_means) s /= static_cast<double>(predictions.size());

  double term = 0.0;
  for (std::size_t k = 1; k <= order; ++k) {
    double model_moment = power_means[k];
    if (spec_.noise_moments) {
      // Binomial expansion of E[(x w + E)^k] in the noise moments.
      const auto& noise = *spec_.noise_moments;
      model_moment = 0.0;
      for (std::size_t j = 0; j <= k; ++j) {
        model_moment += binomial_[k][j] * power_means[j] * noise[k - j];
      }
    }
    const double gap = model_moment - label_moments_[group][k];
    term += moment_weights_[k] * gap * gap;
  }
  return term;
}

double OrderInvariantLoss::sorted_term(std::vector<double>& predictions, std::size_t group) const {
  std::sort(predictions.begin(), predictions.end());
  const auto& labels = sorted_labels_[group];
  switch (spec_.kind) {
    case LossKind::ls:
      return sorted_squared_distance(predictions, labels);
    case LossKind::emd:
      return emd_sorted_equal(predictions, labels);
    case LossKind::ks:
      return ks_sorted(predictions, labels);
    case LossKind::small_d:
      return smallest_squared_distance(predictions, labels,
                                       static_cast<std::size_t>(spec_.small_d));
    case LossKind::sm:
      break;
  }
  throw std::logic_error("sorted_term called for a moment loss");
}

double ls_loss(const Dataset& ds, const WeightVector& w, double lambda2) {
  LossSpec spec;
  spec.kind = LossKind::ls;
  spec.lambda2 = lambda2;
  return OrderInvariantLoss(ds, spec)(w);
}

double sm_loss(const Dataset& ds, const WeightVector& w, const LossSpec& spec) {
  LossSpec s = spec;
  s.kind = LossKind::sm;
  return OrderInvariantLoss(ds, s)(w);
}

double emd_loss(const Dataset& ds, const WeightVector& w, double lambda2) {
  LossSpec spec;
  spec.kind = LossKind::emd;
  spec.lambda2 = lambda2;
  return OrderInvariantLoss(ds, spec)(w);
}

double ks_loss(const Dataset& ds, const WeightVector& w, double lambda2) {
  LossSpec spec;
  spec.kind = LossKind::ks;
  spec.lambda2 = lambda2;
  return OrderInvariantLoss(ds, spec)(w);
}

double small_d_loss(const Dataset& ds, const WeightVector& w, int count, double lambda2) {
  if (count < 1) throw std::invalid_argument("small-D count must be >= 1");
  LossSpec spec;
  spec.kind = LossKind::small_d;
  spec.small_d = count;
  spec.lambda2 = lambda2;
  return OrderInvariantLoss(ds, spec)(w);
}

}  // namespace shuffled
