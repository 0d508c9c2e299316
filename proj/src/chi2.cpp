#include "octest/chi2.hpp"

#include <cmath>
#include <numbers>

#include "octest/errors.hpp"

namespace octest {

double chi2_cdf_df3(double x) {
  if (x <= 0) return 0.0;
  return std::erf(std::sqrt(x / 2)) -
         std::sqrt(2 * x / std::numbers::pi) * std::exp(-x / 2);
}

double chi2_quantile_df3(double prob) {
  if (!(prob > 0 && prob < 1)) {
    throw DomainError("quantile probability must lie in (0,1)");
  }
  double lo = 0.0;
  double hi = 8.0;
  while (chi2_cdf_df3(hi) < prob) hi *= 2;  // CDF -> 1, so this terminates
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf_df3(mid) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace octest
