#pragma once

#include <cstdint>

#include "lorentz/hecke.hpp"
#include "lorentz/lattice.hpp"

namespace lorentz {

/// Monte Carlo estimate of a probability or integral.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n = 0;
};

/// Coefficient c in phi(xi) ~ c xi^{-2} as xi -> infinity (generic start).
double phi_tail_coefficient(int d);
double phi_tail(double xi, int d);
/// Coefficient c in phibar0(xi) ~ c xi^{-3} (between collisions).
double phibar0_tail_coefficient(int d);
double phibar0_tail(double xi, int d);

/// Supremum of the support of the kernel at w = 0, known for d = 2, 3, 4.
double xi0_zero(int d);

/// Planar large-xi profiles: F2(t) = 3/(2 pi^2) ((1-t)_+)^2 and
/// F02(t1, t2) = 3/pi^2 (1 - max(t1, t2))_+.
double f2(double t);
double f02(double t1, double t2);
/// Closed form of the integral of F_d over t > 0.
double f_integral_exact(int d);

/// Affine map y -> y M + shift preserving the paraboloid
/// { y1 > y2^2 + ... + yn^2 - 1 }, with
/// M = [[a^2, 0, ...], [2 a b, a, 0, ...], diag(a) below] (rows) and
/// shift = (a^2 + b^2 - 1, b, 0, ...).
class ParaboloidMap {
public:
    ParaboloidMap(int dim, double alpha, double beta);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] Mat linear() const;
    [[nodiscard]] Vec translation() const;
    [[nodiscard]] double determinant() const;
    [[nodiscard]] Vec apply(const Vec& y) const;
    /// The map "this, then next".
    [[nodiscard]] ParaboloidMap then(const ParaboloidMap& next) const;
    [[nodiscard]] ParaboloidMap inverse() const;

private:
    int dim_;
    double alpha_;
    double beta_;
};

/// Probability that a random lattice of covolume v avoids both cut regions
/// P_h(y) and P_h(y2).
struct XiQuery {
    Vec y;
    Vec y2;
    Vec h;
    double v = 1.0;

    [[nodiscard]] int dim() const { return static_cast<int>(y.size()); }
    /// The single-parameter family: y = y2 = 0, h = (1, sigma, 0, ...).
    static XiQuery single(int dim, double sigma, double v);
    /// y = 0, y2 = (a^2 + b^2 - 1) e1 + b e2.
    static XiQuery normalized(double a, double b, const Vec& h, double v);
};

/// Image of a query under a paraboloid map; the probability is unchanged.
XiQuery transform_query(const XiQuery& q, const ParaboloidMap& map);

struct NormalizedPair {
    double a = 1.0;
    double b = 0.0;
    /// Map sending (0, (a^2 + b^2 - 1) e1 + b e2) to (y, y2).
    ParaboloidMap map;
};

/// Write (y, y2) as the image of a normalized pair; both inside the paraboloid.
NormalizedPair normalize_pair(const Vec& y, const Vec& y2);

/// The query for (1/a, b/a; (a h1, -2 b h1 - h2, -h3, ...); a^{-(n+1)} v), which has
/// the same probability as XiQuery::normalized(a, b, h, v).
XiQuery swap_normalized(double a, double b, const Vec& h, double v);

/// True iff `unimodular` scaled to covolume q.v avoids both cut regions.
bool xi_avoids(const XiQuery& q, const LatticeBasis& unimodular);

/// Monte Carlo estimate with `samples` independent Hecke lattices, stream
/// i seeded by (seed, i).
Estimate xi_estimate(const XiQuery& q, const HeckeSampler& sampler, std::uint64_t samples, std::uint64_t seed);

/// Monte Carlo area/volume of a cut region (expected number of points of a
/// random unimodular lattice inside it).
Estimate siegel_mean(const CutParaboloid& region, std::uint64_t samples, std::uint64_t seed);

/// Integral of Xi(y; e1; 1) over the paraboloid truncated to y1 < x_max.
Estimate paraboloid_normalisation(const HeckeSampler& sampler, double x_max, std::uint64_t samples,
                                  std::uint64_t seed);

class XiCache;

/// Large-xi profile F_d(t) from the tabulated single-parameter probability
/// (d = cache dimension + 1).
double f_d_quad(double t, const XiCache& cache);
/// Companion profile G_d(t) built the same way.
double g_d_quad(double t, const XiCache& cache);
/// Integral of F_d over t > 0 by quadrature of f_d_quad.
double f_d_integral(const XiCache& cache);
/// Smallest t with F_d(t) = 0 according to the table.
double f_d_support(const XiCache& cache);

/// Two-parameter profile F_{0,d}(t1, t2, alpha) by direct Monte Carlo over
/// h and the lattice at once; the h-range is widened until its outer shell
/// stops contributing.
Estimate f0d_quad(double t1, double t2, double alpha, const HeckeSampler& sampler, std::uint64_t samples,
                  std::uint64_t seed);

}  // namespace lorentz
