#include <doctest.h>

#include "oracles.hpp"
#include "shuffled/bench.hpp"
#include "shuffled/parallel.hpp"

using namespace shuffled;

namespace {

EstimatorCell cell(std::string name, std::vector<double> errors, std::uint64_t evaluations) {
  EstimatorCell c;
  c.name = std::move(name);
  c.summary.errors = std::move(errors);
  c.summary.evaluations = evaluations;
  return c;
}

// Linear data with a bias column and optional noise.
Dataset linear_dataset(std::size_t n, std::uint64_t seed, double noise = 0.1) {
  Rng rng(seed);
  Matrix x = oracle::random_matrix(rng, static_cast<Eigen::Index>(n), 3, 0.0, 1.0);
  x.col(2).setOnes();
  Vector w(3);
  w << 2.0, -1.0, 0.5;
  return Dataset(x, x * w + oracle::random_vector(rng, static_cast<Eigen::Index>(n), 0.0, noise));
}

}  // namespace

TEST_CASE("error_band") {
  CHECK(error_band(0.0) == "<5%");
  CHECK(error_band(0.0499) == "<5%");
  CHECK(error_band(0.05) == "5-30%");
  CHECK(error_band(0.30) == "5-30%");
  CHECK(error_band(0.31) == ">30%");
}

TEST_CASE("TrialSummary") {
  TrialSummary s;
  CHECK(s.mean() == std::numeric_limits<double>::infinity());
  s.errors = {0.1, 0.3};
  s.evaluations = 10;
  CHECK(s.mean() == doctest::Approx(0.2));
  CHECK(s.stddev() == doctest::Approx(std::sqrt(0.02)));
  CHECK(s.min() == 0.1);
  CHECK(s.max() == 0.3);
  CHECK(s.mean_evaluations() == 5.0);
}

TEST_CASE("pick_winner") {
  SUBCASE("clear minimum") {
    CHECK(pick_winner({cell("a", {0.5}, 1), cell("b", {0.1}, 100)}, 0.02) == 1);
  }
  SUBCASE("within the margin the cheaper one wins") {
    CHECK(pick_winner({cell("p1", {0.100}, 500), cell("sm", {0.115}, 1)}, 0.02) == 1);
    CHECK(pick_winner({cell("p1", {0.100}, 500), cell("sm", {0.125}, 1)}, 0.02) == 0);
  }
  SUBCASE("exact ties go to the first listed") {
    CHECK(pick_winner({cell("a", {0.2}, 3), cell("b", {0.2}, 3)}, 0.02) == 0);
  }
  SUBCASE("failed estimators never win") {
    CHECK(pick_winner({cell("a", {}, 0), cell("b", {0.9}, 4)}, 0.02) == 1);
    CHECK(pick_winner({cell("a", {}, 0)}, 0.02) == -1);
  }
}

TEST_CASE("Table CSV quoting") {
  Table t{{"a", "b"}, {{"x,y", "say \"hi\""}, {"1", "2"}}};
  CHECK(t.to_csv() == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n1,2\n");
}

TEST_CASE("run_sweep is deterministic and worker-independent") {
  SweepGrid g;
  g.n_values = {64};
  g.d_values = {1, 2};
  g.trials = 2;
  g.seed = 5;
  FitConfig fit;
  fit.starts = 2;
  g.estimators = {named_estimator(EstimatorKind::sm, fit), named_estimator(EstimatorKind::p1, fit)};
  const std::size_t workers = worker_count();
  set_worker_count(1);
  const std::string serial = sweep_table(run_sweep(g)).to_csv();
  set_worker_count(4);
  const auto cells = run_sweep(g);
  set_worker_count(workers);
  CHECK(sweep_table(cells).to_csv() == serial);
  REQUIRE(cells.size() == 2);
  for (const auto& c : cells) CHECK(c.estimators.size() == 2);
  // P1 on d = 1 reproduces SM at a higher evaluation count.
  CHECK(cells[0].winner == "sm");
  CHECK(winner_map(cells).rows.size() == 2);

  g.seed = 6;
  CHECK(sweep_table(run_sweep(g)).to_csv() != serial);
  g.trials = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("sweep cells with many points per replication") {
  SweepGrid g;
  g.d_values = {2};
  g.replication_values = {1, 4};
  g.points_per_replication = 16;
  g.trials = 1;
  g.estimators = {named_estimator(EstimatorKind::sm)};
  const auto cells = run_sweep(g);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].n == 16);
  CHECK(cells[1].n == 64);
}

TEST_CASE("protocol with one point per replication recovers the reference") {
  const Dataset ds = linear_dataset(30, 1);
  ProtocolConfig cfg;
  cfg.replications = {30};
  cfg.trials = 2;
  const ProtocolResult control = negative_control(ds, cfg);
  CHECK(control.rows[0].summary.max() < 1e-9);
  CHECK(control.quality.r_squared > 0.9);

  // Singleton replications with first moments only: the loss is OLS itself.
  cfg.estimator.kind = EstimatorKind::sm;
  cfg.estimator.loss.moment_order = 1;
  cfg.estimator.fit.threshold = 1e-14;
  const ProtocolResult first = standard_dataset_protocol(ds, cfg);
  CHECK(first.rows[0].resolved == "sm");
  CHECK(first.rows[0].summary.max() < 1e-3);

  // Auto on exactly linear data: every moment matches at the OLS weights.
  cfg.estimator = EstimatorChoice{};
  cfg.estimator.fit.threshold = 1e-14;
  const ProtocolResult exact = standard_dataset_protocol(linear_dataset(30, 1, 0.0), cfg);
  CHECK(exact.rows[0].resolved == "sm");
  CHECK(exact.rows[0].summary.max() < 1e-3);
}

TEST_CASE("negative control stays far from the reference") {
  const Dataset ds = linear_dataset(100, 2);
  ProtocolConfig cfg;
  cfg.replications = {1, 2, 4, 8};
  const ProtocolResult r = negative_control(ds, cfg);
  for (const auto& row : r.rows) CHECK(row.summary.mean() > 0.5);
  CHECK(protocol_table(r).rows.size() == 4);
}

TEST_CASE("protocol rejects impossible replication counts") {
  ProtocolConfig cfg;
  cfg.replications = {31};
  CHECK_THROWS_AS(negative_control(linear_dataset(30, 3), cfg), std::invalid_argument);
}

TEST_CASE("a dominant regularizer drives the estimate to zero") {
  RegularizationStudy s;
  s.n = 200;
  s.sparsity = {0};
  s.lambda2 = {1e3};
  s.trials = 2;
  s.fit.starts = 2;
  const auto rows = regularization_study(s);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].summary.mean() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("zero supplied noise leaves the two-moment solution unchanged") {
  const auto inst = simulate_shuffled(Vector::Ones(2), 300, 1.0, 1.0, NoiseSpec::sigma(0.4), 1, 8);
  EstimatorChoice plain{EstimatorKind::sm, {}, {}};
  EstimatorChoice adjusted = plain;
  adjusted.loss.noise_moments = gaussian_noise_moments(0.0, 2);
  CHECK(estimate(inst.dataset, plain).fit.weights == estimate(inst.dataset, adjusted).fit.weights);
}

TEST_CASE("noise adjustment study shape and determinism") {
  NoiseAdjustmentStudy s;
  s.n = 200;
  s.nsr_db = {-20.0, 0.0};
  s.trials = 3;
  const auto a = noise_adjustment_study(s);
  REQUIRE(a.size() == 2);
  CHECK(a[1].sigma > a[0].sigma);
  CHECK(noise_adjustment_table(a).to_csv() == noise_adjustment_table(noise_adjustment_study(s)).to_csv());
}

TEST_CASE("replication curve at R = n matches ordered data") {
  ReplicationStudy s;
  s.n = 24;
  s.w0 = {1.0, 1.0};
  s.replications = {24};
  s.trials = 2;
  s.estimator.fit.threshold = 1e-14;
  s.nsr_db = {-200.0};
  const auto rows = replication_curve(s);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].summary.max() < 1e-3);
}

TEST_CASE("sorted least squares inflates the norm at high noise") {
  ConsistencyStudy s;
  s.w0 = {1.0, 1.0, 1.0};
  s.n_values = {300};
  s.sigma_e = 3.0;
  s.trials = 20;
  FitConfig fit;
  fit.starts = 3;
  s.estimators = {named_estimator(EstimatorKind::ls, fit)};
  const auto rows = consistency_curve(s);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean_norm >= std::sqrt(3.0) - 0.05);
  CHECK(consistency_table(rows).rows.size() == 1);
}
