#pragma once

namespace qprl::math {

double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// Inverse standard normal CDF. Rational approximation refined by one
/// Newton step on the CDF; absolute error below 1e-9 for
/// tau in [1e-6, 1 - 1e-6]. Throws std::domain_error outside (0, 1).
double std_normal_quantile(double tau);

/// mu + sigma * Phi^{-1}(tau). Requires sigma >= 0.
double normal_quantile(double tau, double mu, double sigma);

}  // namespace qprl::math
