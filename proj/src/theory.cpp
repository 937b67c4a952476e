#include "shuffled/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace shuffled {

double ls_limit_d1(const PopulationSpec& s) {
  const double denom = s.mu_x * s.mu_x + s.sigma_x * s.sigma_x;
  if (!(denom > 0.0)) throw std::invalid_argument("ls_limit_d1: mu_x^2 + sigma_x^2 must be positive");
  if (s.sigma_x == 0.0 || s.sigma_e == 0.0) return s.w0;
  if (s.w0 == 0.0) throw std::invalid_argument("ls_limit_d1: w0 must be nonzero when sigma_e > 0");
  const double ratio = s.sigma_e / s.w0;
  return s.w0 * (s.mu_x * s.mu_x + s.sigma_x * std::sqrt(s.sigma_x * s.sigma_x + ratio * ratio)) /
         denom;
}

double sorted_cross_moment_limit(double mu_x, double sigma_x, double mu_y, double sigma_y) {
  return mu_x * mu_y + sigma_x * sigma_y;
}

double sm_d1_mse(const PopulationSpec& s, std::size_t n) {
  if (s.mu_x == 0.0) throw std::invalid_argument("sm_d1_mse: mu_x must be nonzero");
  if (n < 1) throw std::invalid_argument("sm_d1_mse: n must be >= 1");
  return s.sigma_e * s.sigma_e / (s.mu_x * s.mu_x * static_cast<double>(n));
}

}  // namespace shuffled
