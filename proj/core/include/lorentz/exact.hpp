#pragma once

#include <Eigen/Core>

namespace lorentz {

using Vec2 = Eigen::Vector2d;

/// Clamp to [0, 1].
double upsilon(double x) noexcept;

/// Planar collision kernel for exit parameter w and entry parameter z in
/// (-1, 1). Exactly 6/pi^2 for xi <= 1/2.
double phi0_2d(double xi, double w, double z);

/// pi - arccos t + t sqrt(1 - t^2) for t in [0, 1].
double f_cap(double t);

/// Largest xi1 such that the small-xi kernel formula holds for all
/// xi <= xi1; equals 1 / (6 V) with V the largest volume of a tetrahedron
/// inside [0,1] x closed unit disc having vertices (0, -z) and (1, w).
double xi1(const Vec2& w, const Vec2& z);

/// inf over |z| < 1 of xi1(w, z), as a function of |w|.
double xi1_inf_over_z(double w_norm);

/// Three-dimensional collision kernel for xi <= xi1(w, z); throws
/// ValidityError beyond that.
double phi0_3d_smallxi(double xi, const Vec2& w, const Vec2& z);

/// G(w) = (1/2) * integral over the unit disc of f_cap(|w - z| / 2) dz.
double g_of_w(double w_norm);

/// Free path density at fixed exit parameter, for
/// xi <= min(1 / (2 (1 + |w|)), 2 / (3 sqrt 3)).
double phi_3d_smallxi(double xi, double w_norm);

struct SmallXiAggregates {
    double phibar0 = 0.0;  ///< density between consecutive collisions
    double phi0 = 0.0;     ///< density from the surface of a scatterer
    double phi = 0.0;      ///< density from a generic point
    bool phibar0_valid = false;
    bool phi0_valid = false;
    bool phi_valid = false;
};

/// The three d = 3 free path densities near zero. Each value is computed for
/// any xi >= 0; the flag says whether the closed form is exact there.
SmallXiAggregates smallxi_aggregates_3d(double xi);

inline constexpr double kAggregatePhiLimit = 0.25;
inline constexpr double kAggregatePhibar0Limit = 0.25;
double aggregate_phi0_limit();  ///< 2 / (3 sqrt 3)

struct KernelBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Sandwich for the d-dimensional collision kernel that holds for all
/// (w, z): (1 - 2^{d-1} v_{d-1} xi) / zeta(d) <= kernel <= 1 / zeta(d).
KernelBounds kernel_bounds(int d, double xi);

struct LeadingTerms {
    double phibar0 = 0.0;    ///< limit at xi -> 0
    double phi0 = 0.0;       ///< limit at xi -> 0
    double phi = 0.0;        ///< limit at xi -> 0
    double phi_slope = 0.0;  ///< first-order coefficient of phi
};

/// Leading behaviour near xi = 0 in dimension d >= 2.
LeadingTerms smallxi_general_d(int d);

}  // namespace lorentz
