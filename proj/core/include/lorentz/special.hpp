#pragma once

namespace lorentz {

/// Riemann zeta at an integer s >= 2.
double zeta(int s);

/// Volume of the unit ball in R^n.
double v_ball(int n);

}  // namespace lorentz
