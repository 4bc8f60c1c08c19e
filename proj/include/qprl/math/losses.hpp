#pragma once

namespace qprl::math {

/// Asymmetric quantile (pinball) loss |tau - 1{delta<0}| * |delta|.
/// Nonnegative, zero iff delta == 0. Throws std::domain_error for tau
/// outside (0, 1).
double pinball_loss(double delta, double tau);

/// Subgradient d pinball / d delta. The delta == 0 kink uses the
/// delta >= 0 branch (slope tau).
double pinball_slope(double delta, double tau);

/// Quantile weight tau - 1{z<0}: +tau on the nonnegative branch,
/// -(1-tau) on the negative one.
double quantile_weight(double z, double tau);

}  // namespace qprl::math
