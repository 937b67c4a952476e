#pragma once

#include <cstddef>

namespace shuffled {

/// Scalar random-design population: x ~ N(mu_x, sigma_x^2), e ~ N(0, sigma_e^2).
struct PopulationSpec {
  double mu_x = 1.0;
  double sigma_x = 1.0;
  double sigma_e = 1.0;
  double w0 = 1.0;
};

// Large-n limits used as oracles by the tests and studies.

/// Almost-sure limit of the sorted least-squares estimate for d = 1:
///   w0 (mu^2 + sigma_x sqrt(sigma_x^2 + sigma_e^2 / w0^2)) / (mu^2 + sigma_x^2).
/// Throws std::invalid_argument when mu^2 + sigma_x^2 == 0, or when
/// w0 == 0 with sigma_e > 0.
double ls_limit_d1(const PopulationSpec& spec);

/// Limit of (1/n) sum x_(i) y_(i) for independent Gaussian samples sorted
/// ascending: mu_x mu_y + sigma_x sigma_y.
double sorted_cross_moment_limit(double mu_x, double sigma_x, double mu_y, double sigma_y);

/// Asymptotic MSE of sum(y)/sum(x): sigma_e^2 / (mu_x^2 n). Treats the sample
/// design mean as mu_x, so it is an approximation for finite n.
double sm_d1_mse(const PopulationSpec& spec, std::size_t n);

}  // namespace shuffled
