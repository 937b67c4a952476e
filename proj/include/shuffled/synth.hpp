#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shuffled/core.hpp"

namespace shuffled {

using Permutation = std::vector<std::size_t>;

/// i.i.d. Gaussian columns: entry (j, i) ~ N(means[i], stds[i]^2).
struct GaussianDesignSpec {
  std::size_t n = 0;
  std::vector<double> means;
  std::vector<double> stds;

  std::size_t dim() const { return means.size(); }
  /// n x d design with every column drawn from N(mean, std^2).
  static GaussianDesignSpec iid(std::size_t n, std::size_t d, double mean, double std);
};

/// Noise level, set in exactly one of three ways.
class NoiseSpec {
 public:
  enum class Kind { sigma, nsr_db, snr_db };

  static NoiseSpec sigma(double sigma);
  /// Noise-to-signal ratio 20 log10(sigma / |w0|_2).
  static NoiseSpec nsr_db(double db);
  /// Realized signal power mean((x w0)^2) over noise power, in dB.
  static NoiseSpec snr_db(double db);

  Kind kind() const { return kind_; }
  double value() const { return value_; }

  /// Noise standard deviation for a given design and weight vector.
  double resolve_sigma(const Matrix& x, const WeightVector& w0) const;

 private:
  NoiseSpec(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

Matrix generate_design(const GaussianDesignSpec& spec, std::uint64_t seed);

/// Uniform permutation of 0..n-1 (Fisher-Yates).
Permutation sample_permutation(std::size_t n, std::uint64_t seed);

bool is_permutation(const Permutation& perm);

/// y[i] = (x w0)[perm[i]] + e[i], e ~ N(0, sigma^2) i.i.d.
Vector apply_model(const Matrix& x, const WeightVector& w0, const Permutation& perm,
                   const NoiseSpec& noise, std::uint64_t seed);

/// Full generative instance: design, weights, permutation and labels.
struct Scenario {
  GaussianDesignSpec design;
  std::optional<std::vector<double>> w0;  ///< drawn from N(0, I) with w0_seed when unset
  NoiseSpec noise = NoiseSpec::sigma(0.0);
  std::uint64_t design_seed = 1;
  std::uint64_t w0_seed = 2;
  std::uint64_t perm_seed = 3;
  std::uint64_t noise_seed = 4;
  std::size_t replications = 1;  ///< labels are shuffled within replications
  bool shuffle = true;           ///< false keeps labels aligned with rows
};

struct SimulatedInstance {
  Dataset dataset;
  WeightVector w0;
  double sigma = 0.0;
};

SimulatedInstance simulate(const Scenario& scenario);

/// Convenience generator used by the studies: design N(mean, std^2) i.i.d.,
/// labels permuted within `replications` balanced groups. All draws derive
/// from `seed`.
SimulatedInstance simulate_shuffled(const WeightVector& w0, std::size_t n, double mean, double std,
                                    const NoiseSpec& noise, std::size_t replications,
                                    std::uint64_t seed);

}  // namespace shuffled
