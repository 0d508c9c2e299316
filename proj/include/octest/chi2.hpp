#pragma once

namespace octest {

/// CDF of the chi-square distribution with 3 degrees of freedom,
/// F(x) = erf(sqrt(x/2)) - sqrt(2x/pi) * exp(-x/2).
double chi2_cdf_df3(double x);

/// Quantile of the df=3 chi-square by bisection on the closed-form CDF;
/// |CDF(result) - prob| < 1e-10. Throws DomainError outside (0,1).
double chi2_quantile_df3(double prob);

}  // namespace octest
