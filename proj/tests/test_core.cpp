#include <doctest.h>

#include <algorithm>
#include <map>

#include "oracles.hpp"
#include "shuffled/core.hpp"

using namespace shuffled;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::map<int, std::vector<double>> labels_by_group(const Dataset& ds) {
  std::map<int, std::vector<double>> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out[ds.replication_ids()[i]].push_back(ds.labels()[static_cast<Eigen::Index>(i)]);
  }
  for (auto& [id, v] : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace

TEST_CASE("dataset validates its invariants") {
  CHECK_NOTHROW(Dataset(col({1, 2}), vec({1, 2})));
  CHECK_THROWS_AS(Dataset(col({1, 2}), vec({1})), std::invalid_argument);
  CHECK_THROWS_AS(Dataset(Matrix(0, 1), Vector(0)), std::invalid_argument);
  CHECK_THROWS_AS(Dataset(col({1, std::nan("")}), vec({1, 2})), std::invalid_argument);
  CHECK_THROWS_AS(Dataset(col({1, 2}), vec({1, 2}), {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Dataset(col({1, 2}), vec({1, 2}), {0, -1}), std::invalid_argument);

  const Dataset ds(col({1, 2, 3}), vec({1, 2, 3}), {1, 0, 1});
  CHECK(ds.replication_count() == 2);
  CHECK(ds.groups()[0] == std::vector<std::size_t>{1});
  CHECK(ds.groups()[1] == std::vector<std::size_t>{0, 2});
  CHECK(ds.min_group_size() == 1);
}

TEST_CASE("normalize_minmax maps columns onto the unit interval") {
  Matrix x(3, 2);
  x << 2, 1, 4, 1, 6, 1;
  const auto norm = normalize_minmax(Dataset(x, vec({0, 1, 0.5})));
  const Matrix& z = norm.dataset.features();
  CHECK(z(0, 0) == 0.0);
  CHECK(z(1, 0) == 0.5);
  CHECK(z(2, 0) == 1.0);
  SUBCASE("constant column is untouched") {
    CHECK(z.col(1) == Vector::Ones(3));
    CHECK(norm.feature_scaling[1].constant);
  }
  SUBCASE("already normalized labels stay put") {
    CHECK(norm.dataset.labels() == vec({0, 1, 0.5}));
  }
  SUBCASE("scaling maps back") {
    const auto& s = norm.feature_scaling[0];
    CHECK(z(1, 0) * s.scale + s.offset == doctest::Approx(4.0));
  }
  CHECK_THROWS_AS(normalize_minmax(Dataset(col({1}), vec({1}))), std::invalid_argument);
}

TEST_CASE("normalize_minmax is idempotent") {
  Rng rng(3);
  const Dataset ds(oracle::random_matrix(rng, 40, 3, 5.0, 2.0), oracle::random_vector(rng, 40, -1.0, 3.0));
  const Dataset once = normalize_minmax(ds).dataset;
  const Dataset twice = normalize_minmax(once).dataset;
  CHECK((once.features() - twice.features()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((once.labels() - twice.labels()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("partition_replications balances group sizes") {
  const Dataset eight(col({1, 2, 3, 4, 5, 6, 7, 8}), Vector::Zero(8));
  const Dataset split = partition_replications(eight, 4, 17);
  CHECK(split.replication_count() == 4);
  for (const auto& g : split.groups()) CHECK(g.size() == 2);

  const Dataset seven(col({1, 2, 3, 4, 5, 6, 7}), Vector::Zero(7));
  const Dataset halves = partition_replications(seven, 2, 17);
  std::vector<std::size_t> sizes{halves.groups()[0].size(), halves.groups()[1].size()};
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{3, 4});

  const Dataset one = partition_replications(seven, 1, 17);
  CHECK(std::all_of(one.replication_ids().begin(), one.replication_ids().end(),
                    [](int id) { return id == 0; }));

  CHECK_THROWS_AS(partition_replications(seven, 8, 1), std::invalid_argument);
  CHECK_THROWS_AS(partition_replications(seven, 0, 1), std::invalid_argument);
  CHECK(partition_replications(eight, 4, 5).replication_ids() ==
        partition_replications(eight, 4, 5).replication_ids());
}

TEST_CASE("shuffle_within_replications permutes inside blocks only") {
  SUBCASE("one replication per point leaves labels unchanged") {
    const Dataset ds(col({1, 2, 3}), vec({4, 5, 6}), {0, 1, 2});
    CHECK(shuffle_within_replications(ds, 9).labels() == ds.labels());
  }
  SUBCASE("single replication preserves the multiset") {
    const Dataset ds(col({1, 2, 3}), vec({4, 5, 6}));
    auto y = oracle::to_std(shuffle_within_replications(ds, 9).labels());
    std::sort(y.begin(), y.end());
    CHECK(y == std::vector<double>{4, 5, 6});
  }
  SUBCASE("two blocks keep their own labels") {
    const Dataset ds(col({1, 2, 3, 4}), vec({0, 1, 2, 3}), {0, 0, 1, 1});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Dataset s = shuffle_within_replications(ds, seed);
      CHECK(labels_by_group(s) == labels_by_group(ds));
      CHECK(s.features() == ds.features());
    }
  }
  SUBCASE("random blocks keep per-replication multisets exactly") {
    Rng rng(5);
    const Dataset base(oracle::random_matrix(rng, 50, 2), oracle::random_vector(rng, 50));
    const Dataset split = partition_replications(base, 6, 2);
    CHECK(labels_by_group(shuffle_within_replications(split, 3)) == labels_by_group(split));
  }
}

TEST_CASE("relative_error") {
  CHECK(relative_error(vec({1, 1}), vec({1, 1})) == 0.0);
  CHECK(relative_error(vec({1, 1}), vec({1, 0})) == doctest::Approx(1.0));
  CHECK(relative_error(vec({2}), vec({1})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_error(vec({1}), vec({0})), std::invalid_argument);
  CHECK_THROWS_AS(relative_error(vec({1, 2}), vec({1})), std::invalid_argument);

  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const Vector a = oracle::random_vector(rng, 4);
    const Vector b = oracle::random_vector(rng, 4);
    const double c = rng.normal(0.0, 10.0);
    CHECK(relative_error(a, a) == 0.0);
    CHECK(relative_error(c * a, c * b) == doctest::Approx(relative_error(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("ols_fit") {
  CHECK(ols_fit(Dataset(col({1, 2}), vec({2, 4})))[0] == doctest::Approx(2.0));
  Matrix eye(2, 2);
  eye << 1, 0, 0, 1;
  const Vector w = ols_fit(Dataset(eye, vec({3, 5})));
  CHECK(w[0] == doctest::Approx(3.0));
  CHECK(w[1] == doctest::Approx(5.0));
  CHECK(ols_fit(Dataset(col({1, 1, 1}), vec({1, 2, 3})))[0] == doctest::Approx(2.0));

  Matrix collinear(3, 2);
  collinear << 1, 2, 2, 4, 3, 6;
  CHECK_THROWS_AS(ols_fit(Dataset(collinear, vec({1, 2, 3}))), SingularSystemError);

  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Matrix x = oracle::random_matrix(rng, 30, 5, 1.0, 1.0);
    const Vector w0 = oracle::random_vector(rng, 5);
    CHECK((ols_fit(Dataset(x, x * w0)) - w0).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("ols_quality reports R^2 and residual spread") {
  const auto exact = ols_quality(Dataset(col({1, 2, 3}), vec({2, 4, 6})));
  CHECK(exact.r_squared == doctest::Approx(1.0));
  CHECK(exact.residual_std == doctest::Approx(0.0));
}

TEST_CASE("EvalReport mean matches its trials") {
  const auto r = EvalReport::from_trials("sm", {0.1, 0.3}, 2.0);
  CHECK(r.trials == 2);
  CHECK(r.relative_error == doctest::Approx(0.2));
  CHECK(r.per_trial_errors.size() == r.trials);
}
