#include "lorentz/exact.hpp"

#include <Eigen/Geometry>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lorentz/error.hpp"
#include "lorentz/special.hpp"

namespace lorentz {
namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double integrate(F f, double a, double b) {
    if (b <= a) return 0.0;
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-14, &err);
    if (!(err < 1e-10)) throw ConvergenceError("adaptive quadrature missed its 1e-10 target");
    return value;
}

/// Largest |det| over the second free vertex for a fixed first one.
double best_partner(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double s3, const Vec2& z) {
    const Eigen::Vector3d n = a.cross(b);
    return std::abs(n[0] * s3 + n[1] * z[0] + n[2] * z[1]) + std::hypot(n[1], n[2]);
}

double golden_max(auto f, double lo, double hi) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > 1e-12) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    return std::max(f1, f2);
}

void check_disc(const Vec2& v, const char* name) {
    if (!(v.squaredNorm() < 1.0)) throw DomainError(std::string(name) + " must lie in the open unit disc");
}

void check_closed_disc(const Vec2& v, const char* name) {
    if (!(v.squaredNorm() <= 1.0 + 1e-12)) throw DomainError(std::string(name) + " must lie in the closed unit disc");
}

}  // namespace

double upsilon(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

double phi0_2d(double xi, double w, double z) {
    if (!(xi > 0.0)) throw DomainError("xi must be positive");
    if (!(std::abs(w) < 1.0) || !(std::abs(z) < 1.0)) throw DomainError("w and z must lie in (-1, 1)");
    const double c = 6.0 / (kPi * kPi);
    const double num = 1.0 / xi - std::max(std::abs(w), std::abs(z)) - 1.0;
    const double den = std::abs(w + z);
    if (den == 0.0) return num > 0.0 ? c : 0.0;
    return c * upsilon(1.0 + num / den);
}

double f_cap(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("f_cap needs t in [0, 1]");
    return kPi - std::acos(t) + t * std::sqrt(1.0 - t * t);
}

double xi1(const Vec2& w, const Vec2& z) {
    check_closed_disc(w, "w");
    check_closed_disc(z, "z");
    // Volume is affine in each free vertex, so both sit on the rim circles
    // {0} x S^1 or {1} x S^1; the second one is maximised in closed form.
    const Eigen::Vector3d a(1.0, w[0] + z[0], w[1] + z[1]);
    constexpr std::array<std::array<double, 2>, 3> configs{{{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}};
    constexpr int grid = 720;
    double best = 0.0;
    for (const auto& [s2, s3] : configs) {
        auto h = [&](double theta) {
            const Eigen::Vector3d b(s2, std::cos(theta) + z[0], std::sin(theta) + z[1]);
            return best_partner(a, b, s3, z);
        };
        std::vector<double> values(grid);
        for (int i = 0; i < grid; ++i) values[i] = h(2.0 * kPi * i / grid);
        std::vector<int> peaks;
        for (int i = 0; i < grid; ++i) {
            const double v = values[i];
            if (v >= values[(i + grid - 1) % grid] && v >= values[(i + 1) % grid]) peaks.push_back(i);
        }
        std::sort(peaks.begin(), peaks.end(), [&](int l, int r) { return values[l] > values[r]; });
        if (peaks.size() > 8) peaks.resize(8);
        const double step = 2.0 * kPi / grid;
        for (int i : peaks) {
            best = std::max(best, values[i]);
            best = std::max(best, golden_max(h, step * (i - 1), step * (i + 1)));
        }
    }
    if (!(best > 0.0) || !std::isfinite(best)) throw ConvergenceError("xi1 maximisation failed");
    return 1.0 / best;
}

double xi1_inf_over_z(double w_norm) {
    if (!(w_norm >= 0.0 && w_norm <= 1.0 + 1e-12)) throw DomainError("|w| must lie in [0, 1]");
    return std::min(1.0 / (2.0 * (1.0 + w_norm)), aggregate_phi0_limit());
}

double phi0_3d_smallxi(double xi, const Vec2& w, const Vec2& z) {
    if (!(xi > 0.0)) throw DomainError("xi must be positive");
    const double limit = xi1(w, z);
    if (xi > limit * (1.0 + 1e-12))
        throw ValidityError("xi = " + std::to_string(xi) + " exceeds xi1(w, z) = " + std::to_string(limit));
    const double t = 0.5 * (w - z).norm();
    return (1.0 - 6.0 / (kPi * kPi) * f_cap(std::min(t, 1.0)) * xi) / zeta(3);
}

double g_of_w(double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("g_of_w needs |w| in [0, 1]");
    auto inner = [](double r) { return f_cap(0.5 * r) * r; };
    double value = kPi * integrate(inner, 0.0, 1.0 - w);
    if (w > 0.0) {
        auto ring = [w](double r) {
            const double c = std::clamp((w * w + r * r - 1.0) / (2.0 * w * r), -1.0, 1.0);
            return f_cap(std::min(0.5 * r, 1.0)) * std::acos(c) * r;
        };
        // r = 1 - w cos(phi) removes the square-root endpoint behaviour.
        value += integrate([&](double phi) { return ring(1.0 - w * std::cos(phi)) * w * std::sin(phi); }, 0.0, kPi);
    }
    return value;
}

double phi_3d_smallxi(double xi, double w_norm) {
    if (!(xi > 0.0)) throw DomainError("xi must be positive");
    if (!(w_norm >= 0.0 && w_norm < 1.0)) throw DomainError("|w| must lie in [0, 1)");
    const double limit = std::min(1.0 / (2.0 * (1.0 + w_norm)), aggregate_phi0_limit());
    if (xi > limit * (1.0 + 1e-12)) throw ValidityError("xi exceeds the small-xi range for this |w|");
    const double z3 = zeta(3);
    return 1.0 - kPi / z3 * xi + 6.0 / (kPi * kPi * z3) * g_of_w(w_norm) * xi * xi;
}

double aggregate_phi0_limit() { return 2.0 / (3.0 * std::sqrt(3.0)); }

SmallXiAggregates smallxi_aggregates_3d(double xi) {
    if (!(xi >= 0.0)) throw DomainError("xi must be non-negative");
    const double z3 = zeta(3);
    const double pi2 = kPi * kPi;
    SmallXiAggregates out;
    out.phibar0 = kPi / z3 - (3.0 * pi2 + 16.0) / (pi2 * z3) * xi;
    out.phi = kPi - pi2 / z3 * xi + (3.0 * pi2 + 16.0) / (2.0 * kPi * z3) * xi * xi;
    out.phi0 = kPi / z3 - 3.0 * (4.0 * kPi + 3.0 * std::sqrt(3.0)) / (4.0 * kPi * z3) * xi;
    out.phibar0_valid = xi <= kAggregatePhibar0Limit;
    out.phi_valid = xi <= kAggregatePhiLimit;
    out.phi0_valid = xi <= aggregate_phi0_limit();
    return out;
}

KernelBounds kernel_bounds(int d, double xi) {
    if (d < 2) throw DomainError("dimension must be at least 2");
    if (!(xi >= 0.0)) throw DomainError("xi must be non-negative");
    const double zd = zeta(d);
    return {(1.0 - std::ldexp(1.0, d - 1) * v_ball(d - 1) * xi) / zd, 1.0 / zd};
}

LeadingTerms smallxi_general_d(int d) {
    if (d < 2) throw DomainError("dimension must be at least 2");
    const double v = v_ball(d - 1);
    const double zd = zeta(d);
    return {v / zd, v / zd, v, -v * v / zd};
}

}  // namespace lorentz
