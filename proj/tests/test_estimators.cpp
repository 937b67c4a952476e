#include <doctest.h>

#include "oracles.hpp"
#include "shuffled/estimators.hpp"

using namespace shuffled;

namespace {

Matrix rows2(std::initializer_list<std::pair<double, double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [a, b] : rows) {
    m(i, 0) = a;
    m(i, 1) = b;
    ++i;
  }
  return m;
}

Dataset column_data(std::vector<double> x, std::vector<double> y) {
  Matrix m = Eigen::Map<Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  return Dataset(m, Eigen::Map<Vector>(y.data(), static_cast<Eigen::Index>(y.size())));
}

// First and second moment residuals of a d = 2 candidate.
std::pair<double, double> moment_residuals(const Matrix& x, const Vector& y, const WeightVector& w,
                                           double noise_variance = 0.0) {
  const Vector p = x * w;
  return {p.mean() - y.mean(),
          oracle::mean_power(p, 2) + noise_variance - oracle::mean_power(y, 2)};
}

}  // namespace

TEST_CASE("sm_d1") {
  CHECK(sm_d1(column_data({1, 2, 3}, {6, 2, 4}))[0] == doctest::Approx(2.0));
  CHECK(sm_d1(column_data({1, 1}, {3, 1}))[0] == doctest::Approx(2.0));
  CHECK_THROWS_AS(sm_d1(column_data({-1, 1}, {1, 2})), DegenerateMeanError);
  CHECK_THROWS_AS(sm_d1(Dataset(rows2({{1, 2}}), Vector::Ones(1))), std::invalid_argument);
}

TEST_CASE("sm_d2_analytic on a small noiseless instance") {
  const Matrix x = rows2({{1, 0}, {0, 1}, {1, 1}});
  Vector y(3);
  y << 5, 2, 3;
  const CandidateSet c = sm_d2_analytic(Dataset(x, y));
  REQUIRE(c.size() == 2);
  bool found = false;
  for (const auto& cand : c) {
    found = found || (std::abs(cand.weights[0] - 2) < 1e-9 && std::abs(cand.weights[1] - 3) < 1e-9);
    const auto [m1, m2] = moment_residuals(x, y, cand.weights);
    CHECK(std::abs(m1) < 1e-9);
    CHECK(std::abs(m2) < 1e-9);
  }
  CHECK(found);
  CHECK(c[0].loss <= c[1].loss);
}

TEST_CASE("sm_d2_analytic on a symmetric instance") {
  const Matrix x = rows2({{1, 0}, {0, 1}});
  const CandidateSet c = sm_d2_analytic(Dataset(x, Vector::Constant(2, 1.5)));
  REQUIRE(c.size() == 2);
  CHECK(c[0].loss == c[1].loss);
  for (const auto& cand : c) {
    CHECK(cand.weights[0] == doctest::Approx(1.5));
    CHECK(cand.weights[1] == doctest::Approx(1.5));
  }
}

TEST_CASE("sm_d2 roots recover random noiseless weights") {
  Rng rng(404);
  for (int t = 0; t < 100; ++t) {
    const Matrix x = oracle::random_matrix(rng, 200, 2, 1.0, 1.0);
    const WeightVector w0 = oracle::random_vector(rng, 2);
    const Vector y = oracle::shuffled_labels(rng, x, w0);
    const CandidateSet c = sm_d2_analytic(Dataset(x, y));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cand : c) {
      best = std::min(best, relative_error(cand.weights, w0));
      const auto [m1, m2] = moment_residuals(x, y, cand.weights);
      const double scale = std::max(1.0, oracle::mean_power(y, 2));
      CHECK(std::abs(m1) <= 1e-9 * scale);
      CHECK(std::abs(m2) <= 1e-9 * scale);
    }
    CHECK(best < 1e-6);
  }
}

TEST_CASE("sm_d2 noise variance enters the second moment") {
  Rng rng(405);
  const Matrix x = oracle::random_matrix(rng, 500, 2, 1.0, 1.0);
  const Vector y = oracle::shuffled_labels(rng, x, Vector::Ones(2)) +
                   oracle::random_vector(rng, 500, 0.0, 0.5);
  for (const auto& w : sm_d2_roots(x, y, 0.25)) {
    const auto [m1, m2] = moment_residuals(x, y, w, 0.25);
    CHECK(std::abs(m1) < 1e-9);
    CHECK(std::abs(m2) < 1e-9);
  }
  const auto plain = sm_d2_roots(x, y);
  const auto zero = sm_d2_roots(x, y, 0.0);
  CHECK(plain[0] == zero[0]);
  CHECK(plain[1] == zero[1]);
}

TEST_CASE("sm_d2 degenerate inputs") {
  SUBCASE("zero-mean first column swaps") {
    const Matrix x = rows2({{-1, 1}, {1, 2}, {0, 3}});
    const Vector y = x * Vector::Constant(2, 1.0);
    bool found = false;
    for (const auto& w : sm_d2_roots(x, y)) found = found || (w - Vector::Ones(2)).norm() < 1e-9;
    CHECK(found);
  }
  SUBCASE("both columns zero mean") {
    CHECK_THROWS_AS(sm_d2_roots(rows2({{-1, 1}, {1, -1}}), Vector::Ones(2)), DegenerateMeanError);
  }
  SUBCASE("collinear columns") {
    CHECK_THROWS_AS(sm_d2_roots(rows2({{1, 2}, {2, 4}, {3, 6}}), Vector::Ones(3)),
                    SingularSystemError);
  }
  SUBCASE("negative discriminant") {
    // Label second moment far below what any weights on this design can give.
    const Matrix x = rows2({{1, 0}, {0, 1}, {2, 1}});
    Vector y(3);
    y << 10, 10, 10;
    CHECK_THROWS_AS(sm_d2_roots(x, y, 1000.0), NoRealSolutionError);
  }
}

TEST_CASE("resolve_auto follows the d and R rule") {
  CHECK(resolve_auto(1, 1) == EstimatorKind::sm);
  CHECK(resolve_auto(2, 1) == EstimatorKind::sm);
  CHECK(resolve_auto(5, 15) == EstimatorKind::sm);
  CHECK(resolve_auto(5, 14) == EstimatorKind::p1);
  CHECK(resolve_auto(5, 4) == EstimatorKind::p1);
  for (std::size_t d = 1; d <= 8; ++d) {
    for (std::size_t r = 1; r <= 30; ++r) {
      const bool sm = d <= 2 || r >= 3 * d;
      CHECK(resolve_auto(d, r) == (sm ? EstimatorKind::sm : EstimatorKind::p1));
    }
  }
}

TEST_CASE("projection estimator") {
  Rng rng(12);
  FitConfig cfg;
  cfg.threshold = 1e-12;

  SUBCASE("noiseless data is represented exactly") {
    const Matrix x = oracle::random_matrix(rng, 150, 3, 1.0, 1.0);
    Vector w0(3);
    w0 << 1.0, 0.5, -0.8;
    const Dataset ds(x, oracle::shuffled_labels(rng, x, w0));
    const FitResult r = projection_estimate(ds, 1, cfg);
    CHECK(r.loss < 1e-6);
    CHECK(std::abs((x * r.weights).mean() - ds.labels().mean()) < 1e-9);
  }
  SUBCASE("d = 1 reduces to the closed form") {
    const Matrix x = oracle::random_matrix(rng, 80, 1, 1.0, 1.0);
    Vector y = oracle::shuffled_labels(rng, x, Vector::Constant(1, 1.7));
    y += oracle::random_vector(rng, 80, 0.0, 0.3);
    const Dataset ds(x, y);
    CHECK(std::abs(projection_estimate(ds, 1, cfg).weights[0] - sm_d1(ds)[0]) < 1e-9);
  }
  SUBCASE("P2 on d = 2 matches a closed-form candidate") {
    const Matrix x = oracle::random_matrix(rng, 100, 2, 1.0, 1.0);
    const Vector w0 = oracle::random_vector(rng, 2);
    const Dataset ds(x, oracle::shuffled_labels(rng, x, w0));
    const FitResult r = projection_estimate(ds, 2, cfg);
    CHECK(relative_error(r.weights, sm_d2_analytic(ds).front().weights) < 1e-6);
  }
  SUBCASE("fixed projections") {
    const Matrix x = oracle::random_matrix(rng, 50, 2, 1.0, 1.0);
    const Dataset ds(x, oracle::random_vector(rng, 50, 1.0, 1.0));
    // A projection orthogonal to the column sums leaves x p with zero sum.
    Matrix orth(2, 1);
    const Vector sums = x.colwise().sum();
    orth << sums[1], -sums[0];
    CHECK_FALSE(projection_weights(ds, orth).has_value());
    CHECK_THROWS_AS(projection_weights(ds, Matrix::Ones(3, 1)), std::invalid_argument);
  }
  CHECK_THROWS_AS(projection_estimate(Dataset(Matrix::Ones(3, 1), Vector::Ones(3)), 2, cfg),
                  std::invalid_argument);
}

TEST_CASE("P1 satisfies the first-moment identity on random instances") {
  Rng rng(606);
  FitConfig cfg;
  cfg.starts = 3;
  for (int t = 0; t < 20; ++t) {
    const auto d = static_cast<Eigen::Index>(2 + rng.below(4));
    const Matrix x = oracle::random_matrix(rng, 60, d, 1.0, 1.0);
    Vector y = oracle::shuffled_labels(rng, x, oracle::random_vector(rng, d));
    y += oracle::random_vector(rng, 60, 0.0, 0.5);
    cfg.seed = static_cast<std::uint64_t>(t);
    const FitResult r = projection_estimate(Dataset(x, y), 1, cfg);
    CHECK(std::abs((x * r.weights).mean() - y.mean()) < 1e-9);
  }
}

TEST_CASE("estimate dispatch") {
  Rng rng(808);
  const Matrix x = oracle::random_matrix(rng, 120, 2, 1.0, 1.0);
  Vector w0(2);
  w0 << 1.0, -0.5;
  Vector y = oracle::shuffled_labels(rng, x, w0);
  y += oracle::random_vector(rng, 120, 0.0, 0.2);
  const Dataset ds(x, y);

  SUBCASE("auto on d = 2 is the closed-form SM") {
    const Estimate e = estimate(ds, EstimatorChoice{});
    CHECK(e.resolved == EstimatorKind::sm);
    CHECK(e.method == "closed_form");
    CHECK(e.candidates.size() == 2);
    CHECK(e.fit.weights == e.candidates.front().weights);
  }
  SUBCASE("replications force the numerical SM path") {
    EstimatorChoice c{EstimatorKind::sm, {}, {}};
    c.fit.starts = 3;
    const Estimate e = estimate(partition_replications(ds, 3, 1), c);
    CHECK(e.method == "multistart");
  }
  SUBCASE("regularization forces the numerical SM path") {
    EstimatorChoice c{EstimatorKind::sm, {}, {}};
    c.loss.lambda2 = 0.1;
    c.fit.starts = 3;
    CHECK(estimate(ds, c).method == "multistart");
  }
  SUBCASE("LS may beat the true weights but never loses to them") {
    EstimatorChoice c{EstimatorKind::ls, {}, {}};
    const Estimate e = estimate(ds, c);
    CHECK(e.fit.loss <= ls_loss(ds, w0));
    CHECK(e.fit.loss == doctest::Approx(ls_loss(ds, e.fit.weights)).epsilon(1e-12));
  }
  SUBCASE("ols uses the given order") {
    const Dataset aligned(x, x * w0);
    const Estimate e = estimate(aligned, EstimatorChoice{EstimatorKind::ols, {}, {}});
    CHECK((e.fit.weights - w0).norm() < 1e-9);
  }
  SUBCASE("every loss-based estimator runs") {
    for (EstimatorKind k : {EstimatorKind::emd, EstimatorKind::ks, EstimatorKind::small_d,
                            EstimatorKind::p1, EstimatorKind::p2}) {
      EstimatorChoice c{k, {}, {}};
      c.fit.starts = 2;
      const Estimate e = estimate(ds, c);
      CHECK(e.resolved == k);
      CHECK(e.fit.weights.size() == 2);
    }
  }
  SUBCASE("closed-form d = 1 on noiseless data") {
    const Matrix x1 = oracle::random_matrix(rng, 40, 1, 1.0, 1.0);
    const Dataset d1(x1, oracle::shuffled_labels(rng, x1, Vector::Constant(1, -2.5)));
    const Estimate e = estimate(d1, EstimatorChoice{EstimatorKind::sm, {}, {}});
    CHECK(std::abs(e.fit.weights[0] + 2.5) < 1e-9);
    CHECK(e.fit.evaluations == 1);
  }
}

TEST_CASE("estimator names") {
  CHECK(parse_estimator("smalld") == EstimatorKind::small_d);
  CHECK(parse_estimator("auto") == EstimatorKind::automatic);
  try {
    parse_estimator("bogus");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("p2") != std::string::npos);
  }
}
