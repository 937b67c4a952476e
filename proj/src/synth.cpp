#include "shuffled/synth.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "shuffled/rng.hpp"

namespace shuffled {

GaussianDesignSpec GaussianDesignSpec::iid(std::size_t n, std::size_t d, double mean, double std) {
  return {n, std::vector<double>(d, mean), std::vector<double>(d, std)};
}

NoiseSpec NoiseSpec::sigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("noise sigma must be finite and nonnegative");
  }
  return NoiseSpec(Kind::sigma, sigma);
}

NoiseSpec NoiseSpec::nsr_db(double db) {
  if (!std::isfinite(db)) throw std::invalid_argument("nsr_db must be finite");
  return NoiseSpec(Kind::nsr_db, db);
}

NoiseSpec NoiseSpec::snr_db(double db) {
  if (!std::isfinite(db)) throw std::invalid_argument("snr_db must be finite");
  return NoiseSpec(Kind::snr_db, db);
}

double NoiseSpec::resolve_sigma(const Matrix& x, const WeightVector& w0) const {
  switch (kind_) {
    case Kind::sigma:
      return value_;
    case Kind::nsr_db:
      return w0.norm() * std::pow(10.0, value_ / 20.0);
    case Kind::snr_db: {
      const double signal_power = (x * w0).squaredNorm() / static_cast<double>(x.rows());
      return std::sqrt(signal_power / std::pow(10.0, value_ / 10.0));
    }
  }
  return value_;
}

Matrix generate_design(const GaussianDesignSpec& spec, std::uint64_t seed) {
  if (spec.means.size() != spec.stds.size()) {
    throw std::invalid_argument("design means and stds differ in length");
  }
  for (double s : spec.stds) {
    if (!(s >= 0.0)) throw std::invalid_argument("design stds must be nonnegative");
  }
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto d = static_cast<Eigen::Index>(spec.dim());
  Matrix x(n, d);
  Rng rng(derive_seed(seed, "design"));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto c = static_cast<std::size_t>(i);
      x(j, i) = rng.normal(spec.means[c], spec.stds[c]);
    }
  }
  return x;
}

Permutation sample_permutation(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("permutation size must be positive");
  Permutation perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "permutation"));
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

bool is_permutation(const Permutation& perm) {
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t p : perm) {
    if (p >= perm.size() || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

Vector apply_model(const Matrix& x, const WeightVector& w0, const Permutation& perm,
                   const NoiseSpec& noise, std::uint64_t seed) {
  if (x.cols() != w0.size()) {
    throw std::invalid_argument("apply_model: design has " + std::to_string(x.cols()) +
                                " columns but w0 has " + std::to_string(w0.size()) + " entries");
  }
  if (perm.size() != static_cast<std::size_t>(x.rows()) || !is_permutation(perm)) {
    throw std::invalid_argument("apply_model: perm is not a permutation of the rows");
  }
  const Vector signal = x * w0;
  const double sigma = noise.resolve_sigma(x, w0);
  Vector y(signal.size());
  Rng rng(derive_seed(seed, "noise"));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y[i] = signal[static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])];
    if (sigma > 0.0) y[i] += sigma * rng.normal();
  }
  return y;
}

SimulatedInstance simulate(const Scenario& scenario) {
  const std::size_t d = scenario.design.dim();
  Matrix x = generate_design(scenario.design, scenario.design_seed);

  WeightVector w0(static_cast<Eigen::Index>(d));
  if (scenario.w0) {
    if (scenario.w0->size() != d) {
      throw std::invalid_argument("scenario w0 length does not match design dimension");
    }
    for (std::size_t i = 0; i < d; ++i) w0[static_cast<Eigen::Index>(i)] = (*scenario.w0)[i];
  } else {
    Rng rng(derive_seed(scenario.w0_seed, "w0"));
    for (Eigen::Index i = 0; i < w0.size(); ++i) w0[i] = rng.normal();
  }

  const std::size_t n = scenario.design.n;
  std::vector<int> ids(n, 0);
  if (scenario.replications > 1) {
    Dataset placeholder(x, Vector::Zero(static_cast<Eigen::Index>(n)));
    ids = partition_replications(placeholder, scenario.replications, scenario.perm_seed)
              .replication_ids();
  }

  Permutation perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (scenario.shuffle) {
    if (scenario.replications <= 1) {
      perm = sample_permutation(n, scenario.perm_seed);
    } else {
      // Uniform permutation restricted to each replication's index set.
      Dataset index_carrier(x, Vector::Zero(static_cast<Eigen::Index>(n)), ids);
      Rng rng(derive_seed(scenario.perm_seed, "block-permutation"));
      for (const auto& group : index_carrier.groups()) {
        std::vector<std::size_t> local = group;
        for (std::size_t i = local.size(); i > 1; --i) std::swap(local[i - 1], local[rng.below(i)]);
        for (std::size_t k = 0; k < group.size(); ++k) perm[group[k]] = local[k];
      }
    }
  }

  const double sigma = scenario.noise.resolve_sigma(x, w0);
  Vector y = apply_model(x, w0, perm, NoiseSpec::sigma(sigma), scenario.noise_seed);
  return {Dataset(std::move(x), std::move(y), std::move(ids)), std::move(w0), sigma};
}

SimulatedInstance simulate_shuffled(const WeightVector& w0, std::size_t n, double mean, double std,
                                    const NoiseSpec& noise, std::size_t replications,
                                    std::uint64_t seed) {
  Scenario s;
  s.design = GaussianDesignSpec::iid(n, static_cast<std::size_t>(w0.size()), mean, std);
  s.w0 = std::vector<double>(w0.data(), w0.data() + w0.size());
  s.noise = noise;
  s.design_seed = derive_seed(seed, "design");
  s.perm_seed = derive_seed(seed, "perm");
  s.noise_seed = derive_seed(seed, "noise");
  s.replications = replications;
  return simulate(s);
}

}  // namespace shuffled
