#include "shuffled/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shuffled {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ols: return "ols";
    case EstimatorKind::sm: return "sm";
    case EstimatorKind::ls: return "ls";
    case EstimatorKind::p1: return "p1";
    case EstimatorKind::p2: return "p2";
    case EstimatorKind::emd: return "emd";
    case EstimatorKind::ks: return "ks";
    case EstimatorKind::small_d: return "smalld";
    case EstimatorKind::automatic: return "auto";
  }
  return "?";
}

std::string estimator_names() { return "ols, sm, ls, p1, p2, emd, ks, smalld, auto"; }

EstimatorKind parse_estimator(std::string_view name) {
  for (auto kind : {EstimatorKind::ols, EstimatorKind::sm, EstimatorKind::ls, EstimatorKind::p1,
                    EstimatorKind::p2, EstimatorKind::emd, EstimatorKind::ks,
                    EstimatorKind::small_d, EstimatorKind::automatic}) {
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown estimator '" + std::string(name) +
                              "'; valid estimators: " + estimator_names());
}

double degenerate_sum_threshold(std::size_t n) { return 1e-12 * static_cast<double>(n); }

WeightVector sm_d1(const Dataset& ds) {
  if (ds.dim() != 1) throw std::invalid_argument("sm_d1 requires d = 1");
  const double sx = ds.features().col(0).sum();
  if (std::abs(sx) <= degenerate_sum_threshold(ds.size())) {
    throw DegenerateMeanError("sm_d1: feature mean is zero; the first moment does not identify w");
  }
  WeightVector w(1);
  w[0] = ds.labels().sum() / sx;
  return w;
}

std::vector<Eigen::Vector2d> sm_d2_roots(const Matrix& x, const Vector& y,
                                         std::optional<double> noise_variance) {
  if (x.cols() != 2) throw std::invalid_argument("sm_d2_roots requires two columns");
  const double n = static_cast<double>(x.rows());
  const double eps = degenerate_sum_threshold(static_cast<std::size_t>(x.rows()));

  Eigen::Index first = 0, second = 1;
  if (std::abs(x.col(0).sum()) <= eps) {
    if (std::abs(x.col(1).sum()) <= eps) {
      throw DegenerateMeanError("sm_d2: both feature columns have zero mean");
    }
    std::swap(first, second);
  }
  const auto x1 = x.col(first);
  const auto x2 = x.col(second);

  const double m1 = x1.mean();
  const double m2 = x2.mean();
  const double s11 = x1.squaredNorm() / n;
  const double s12 = x1.dot(x2) / n;
  const double s22 = x2.squaredNorm() / n;
  const double my = y.mean();
  const double syy = y.squaredNorm() / n - noise_variance.value_or(0.0);

  // First moment: w1 = u - r w2. Substituting into the second moment gives
  // a w2^2 + b w2 + c = 0.
  const double u = my / m1;
  const double r = m2 / m1;
  const double a = s11 * r * r - 2.0 * s12 * r + s22;
  const double b = 2.0 * s12 * u - 2.0 * s11 * u * r;
  const double c = s11 * u * u - syy;

  const double a_scale = s11 * r * r + 2.0 * std::abs(s12 * r) + s22;
  if (!(a > 1e-13 * a_scale)) {
    throw SingularSystemError("sm_d2: feature columns are collinear");
  }
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    if (disc >= -1e-12 * std::max(b * b, std::abs(4.0 * a * c))) {
      disc = 0.0;
    } else {
      throw NoRealSolutionError("sm_d2: moment equations have no real solution");
    }
  }

  double w2a = 0.0, w2b = 0.0;
  if (disc == 0.0) {
    w2a = w2b = -b / (2.0 * a);
  } else {
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    w2a = q / a;
    w2b = q != 0.0 ? c / q : -w2a;
  }

  std::vector<Eigen::Vector2d> roots;
  for (double w2 : {w2a, w2b}) {
    Eigen::Vector2d w;
    w[first] = u - r * w2;
    w[second] = w2;
    roots.push_back(w);
  }
  return roots;
}

CandidateSet sm_d2_analytic(const Dataset& ds, std::optional<double> noise_variance) {
  if (ds.dim() != 2) throw std::invalid_argument("sm_d2_analytic requires d = 2");
  const OrderInvariantLoss ls(ds, LossSpec{});
  CandidateSet candidates;
  for (const auto& root : sm_d2_roots(ds.features(), ds.labels(), noise_variance)) {
    WeightVector w = root;
    const double loss = ls(w);
    candidates.push_back({std::move(w), loss});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& l, const Candidate& r) { return l.loss < r.loss; });
  return candidates;
}

EstimatorKind resolve_auto(std::size_t d, std::size_t replications) {
  return (d <= 2 || replications >= 3 * d) ? EstimatorKind::sm : EstimatorKind::p1;
}

namespace {

struct ProjectionScore {
  WeightVector weights;
  double loss = std::numeric_limits<double>::infinity();
};

std::optional<ProjectionScore> score_projection(const OrderInvariantLoss& ls, const Dataset& ds,
                                                const Matrix& projection,
                                                const ProjectionOptions& options) {
  const Matrix projected = ds.features() * projection;
  if (projection.cols() == 1) {
    const double sum = projected.col(0).sum();
    if (!(std::abs(sum) > degenerate_sum_threshold(ds.size()))) return std::nullopt;
    const double reduced = ds.labels().sum() / sum;
    ProjectionScore score;
    score.weights = projection.col(0) * reduced;
    score.loss = ls.data_term(projected.col(0) * reduced) +
                 options.lambda2 * score.weights.squaredNorm();
    return score;
  }

  std::vector<Eigen::Vector2d> roots;
  try {
    roots = sm_d2_roots(projected, ds.labels(), options.noise_variance);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
  std::optional<ProjectionScore> best;
  for (const auto& root : roots) {
    WeightVector w = projection * root;
    const double loss = ls.data_term(projected * root) + options.lambda2 * w.squaredNorm();
    if (!best || loss < best->loss) best = ProjectionScore{std::move(w), loss};
  }
  return best;
}

Matrix as_projection(const WeightVector& flat, Eigen::Index d, Eigen::Index dp) {
  return Eigen::Map<const Matrix>(flat.data(), d, dp);
}

void normalize_columns(WeightVector& flat, Eigen::Index d, Eigen::Index dp) {
  Eigen::Map<Matrix> p(flat.data(), d, dp);
  for (Eigen::Index j = 0; j < dp; ++j) {
    const double norm = p.col(j).norm();
    if (norm > 0.0) p.col(j) /= norm;
  }
}

}  // namespace

std::optional<WeightVector> projection_weights(const Dataset& ds, const Matrix& projection,
                                               std::optional<double> noise_variance) {
  if (projection.rows() != static_cast<Eigen::Index>(ds.dim()) || projection.cols() < 1 ||
      projection.cols() > 2) {
    throw std::invalid_argument("projection must be d x 1 or d x 2");
  }
  const OrderInvariantLoss ls(ds, LossSpec{});
  ProjectionOptions options;
  options.noise_variance = noise_variance;
  auto score = score_projection(ls, ds, projection, options);
  if (!score) return std::nullopt;
  return score->weights;
}

FitResult projection_estimate(const Dataset& ds, int projection_dim, const FitConfig& cfg,
                              const ProjectionOptions& options) {
  const auto d = static_cast<Eigen::Index>(ds.dim());
  if (projection_dim < 1 || projection_dim > std::min<int>(2, static_cast<int>(d))) {
    throw std::invalid_argument("projection dimension must lie in [1, min(2, d)]");
  }
  const Eigen::Index dp = projection_dim;
  const OrderInvariantLoss ls(ds, LossSpec{});

  Objective objective = [&](const WeightVector& flat) {
    auto score = score_projection(ls, ds, as_projection(flat, d, dp), options);
    return score ? score->loss : std::numeric_limits<double>::infinity();
  };
  Constraint unit_columns = [d, dp](WeightVector& flat) { normalize_columns(flat, d, dp); };

  FitResult fit = multistart_descent(objective, static_cast<std::size_t>(d * dp), cfg, unit_columns);
  auto best = score_projection(ls, ds, as_projection(fit.weights, d, dp), options);
  if (!best) throw NumericalError("projection_estimate: best projection became degenerate");
  fit.weights = best->weights;
  fit.loss = best->loss;
  fit.evaluations += 1;
  return fit;
}

namespace {

FitResult closed_form_result(const WeightVector& w, double loss) {
  FitResult fit;
  fit.weights = w;
  fit.loss = loss;
  fit.start_index = 0;
  fit.iterations_per_start = {0};
  fit.converged = {true};
  fit.evaluations = 1;
  return fit;
}

LossSpec with_kind(LossSpec spec, LossKind kind) {
  spec.kind = kind;
  return spec;
}

}  // namespace

Estimate estimate(const Dataset& ds, const EstimatorChoice& choice) {
  Estimate out;
  const std::size_t d = ds.dim();
  out.resolved = choice.kind == EstimatorKind::automatic
                     ? resolve_auto(d, ds.replication_count())
                     : choice.kind;

  auto multistart = [&](LossKind kind) {
    OrderInvariantLoss loss(ds, with_kind(choice.loss, kind));
    out.warnings.insert(out.warnings.end(), loss.warnings().begin(), loss.warnings().end());
    out.method = "multistart";
    out.fit = multistart_descent([&loss](const WeightVector& w) { return loss(w); }, d, choice.fit);
  };

  switch (out.resolved) {
    case EstimatorKind::ols: {
      const WeightVector w = ols_fit(ds);
      out.method = "closed_form";
      out.fit = closed_form_result(w, (ds.features() * w - ds.labels()).squaredNorm());
      return out;
    }
    case EstimatorKind::sm: {
      const LossSpec spec = resolve_loss_spec(with_kind(choice.loss, LossKind::sm), ds);
      const bool closed_form_fits = ds.replication_count() == 1 && spec.lambda2 == 0.0 &&
                                    (d == 1 || d == 2) &&
                                    spec.moment_order == static_cast<int>(d);
      if (closed_form_fits && d == 1) {
        const WeightVector w = sm_d1(ds);
        out.method = "closed_form";
        out.fit = closed_form_result(w, sm_loss(ds, w, spec));
        return out;
      }
      if (closed_form_fits && d == 2) {
        std::optional<double> noise_variance;
        if (spec.noise_moments) noise_variance = (*spec.noise_moments)[2];
        try {
          out.candidates = sm_d2_analytic(ds, noise_variance);
          out.method = "closed_form";
          out.fit = closed_form_result(out.candidates.front().weights,
                                       sm_loss(ds, out.candidates.front().weights, spec));
          return out;
        } catch (const NoRealSolutionError&) {
          out.warnings.push_back("two-moment equations have no real root; using numerical SM");
        }
      }
      multistart(LossKind::sm);
      return out;
    }
    case EstimatorKind::ls:
      multistart(LossKind::ls);
      return out;
    case EstimatorKind::emd:
      multistart(LossKind::emd);
      return out;
    case EstimatorKind::ks:
      multistart(LossKind::ks);
      return out;
    case EstimatorKind::small_d:
      multistart(LossKind::small_d);
      return out;
    case EstimatorKind::p1:
    case EstimatorKind::p2: {
      ProjectionOptions options;
      options.lambda2 = choice.loss.lambda2;
      if (choice.loss.noise_moments && choice.loss.noise_moments->size() > 2) {
        options.noise_variance = (*choice.loss.noise_moments)[2];
      }
      out.method = "projection";
      out.fit = projection_estimate(ds, out.resolved == EstimatorKind::p1 ? 1 : 2, choice.fit,
                                    options);
      return out;
    }
    case EstimatorKind::automatic:
      break;
  }
  throw std::logic_error("estimate: unresolved estimator");
}

}  // namespace shuffled
