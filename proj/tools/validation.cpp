#include "validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lorentz/billiard.hpp"
#include "lorentz/curves.hpp"
#include "lorentz/error.hpp"
#include "lorentz/exact.hpp"
#include "lorentz/lattice.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/special.hpp"
#include "lorentz/tail.hpp"
#include "lorentz/xi_cache.hpp"

namespace lorentz::validation {
namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

Result make_result(int criterion, std::string title) {
    Result r;
    r.criterion = criterion;
    r.title = std::move(title);
    return r;
}

struct Timed {
    CurveEstimate curve;
    double seconds = 0.0;
};

// Curves and tables shared between criteria, built on first use.
class Workspace {
public:
    explicit Workspace(const Options& o) : opt_(o) {}

    void log(const std::string& line) const {
        if (opt_.log) opt_.log(line);
    }

    const Timed& phi_curve() {
        if (!phi_) {
            McConfig cfg;
            cfg.seed = opt_.seed;
            if (!opt_.fast) {
                cfg.p = 1511;
                cfg.m = 20;
            }
            log("computing generic-start curve, p=" + std::to_string(cfg.p) + " m=" + std::to_string(cfg.m));
            const auto t0 = Clock::now();
            CurveEstimate c = mc_phi_curve(cfg, 0.02, 5.0);
            phi_ = Timed{std::move(c), seconds_since(t0)};
        }
        return *phi_;
    }

    // Large random-mode run used for the tail in full mode.
    const Timed& phi_tail_curve() {
        if (opt_.fast) return phi_curve();
        if (!phi_tail_) {
            McConfig cfg;
            cfg.seed = opt_.seed;
            cfg.p = 1000000007;
            cfg.mode = SampleMode::random;
            cfg.samples = 100000000;
            log("computing random-mode tail curve, p=1000000007, 1e8 samples");
            const auto t0 = Clock::now();
            CurveEstimate c = mc_phi_curve(cfg, 0.05, 5.0);
            phi_tail_ = Timed{std::move(c), seconds_since(t0)};
        }
        return *phi_tail_;
    }

    const Timed& phi0_curve() {
        if (!phi0_) {
            McConfig cfg = phi0_config();
            cfg.samples = 200000;
            log("computing scatterer-start curve, p=10007, 2e5 lattices x 32 directions");
            const auto t0 = Clock::now();
            CurveEstimate c = mc_phi0_curve(cfg, 0.02, 1.2);
            phi0_ = Timed{std::move(c), seconds_since(t0)};
        }
        return *phi0_;
    }

    const Timed& phi0_support_curve() {
        if (opt_.fast) return phi0_curve();
        if (!phi0_support_) {
            McConfig cfg = phi0_config();
            cfg.p = 1000000007;
            cfg.samples = 2000000;
            cfg.seed = opt_.seed + 1;
            log("computing scatterer-start support run, p=1000000007, 2e6 lattices x 32 directions");
            const auto t0 = Clock::now();
            CurveEstimate c = mc_phi0_curve(cfg, 0.02, 1.2);
            phi0_support_ = Timed{std::move(c), seconds_since(t0)};
        }
        return *phi0_support_;
    }

    const XiCache& xi_table() {
        if (!xi_) {
            log("building the d=3 probability table");
            const HeckeSampler sampler(2, 10007);
            xi_ = XiCache::build(XiGrid{}, sampler, opt_.fast ? 500 : 2000, opt_.seed);
        }
        return *xi_;
    }

    [[nodiscard]] const Options& options() const { return opt_; }

private:
    McConfig phi0_config() const {
        McConfig cfg;
        cfg.p = 10007;
        cfg.mode = SampleMode::random;
        cfg.seed = opt_.seed;
        cfg.rotation = RotationParams::per_sample();
        cfg.directions = 32;
        return cfg;
    }

    Options opt_;
    std::optional<Timed> phi_;
    std::optional<Timed> phi_tail_;
    std::optional<Timed> phi0_;
    std::optional<Timed> phi0_support_;
    std::optional<XiCache> xi_;
};

// Closed-form densities near zero, written out here rather than taken from
// the library so the comparison does not test the code against itself.
double exact_phi_bin(double a, double b) {
    const double z3 = zeta(3);
    const double c1 = kPi * kPi / z3;
    const double c2 = (3.0 * kPi * kPi + 16.0) / (2.0 * kPi * z3);
    return kPi - c1 * (a + b) / 2.0 + c2 * (a * a + a * b + b * b) / 3.0;
}

double exact_phi0_bin(double a, double b) {
    const double z3 = zeta(3);
    const double slope = 3.0 * (4.0 * kPi + 3.0 * std::sqrt(3.0)) / (4.0 * kPi * z3);
    return kPi / z3 - slope * (a + b) / 2.0;
}

double exact_kernel(double xi, const Vec2& w, const Vec2& z) {
    const double t = (w - z).norm() / 2.0;
    const double cap = kPi - std::acos(t) + t * std::sqrt(1.0 - t * t);
    return (1.0 - 6.0 / (kPi * kPi) * cap * xi) / zeta(3);
}

Result criterion1(Workspace& ws) {
    Result r = make_result(1, "small-xi generic-start curve");
    const Timed& t = ws.phi_curve();
    const double tol = ws.options().fast ? 0.02 : 0.005;
    double worst = 0.0;
    int bins = 0;
    for (std::size_t n = 0; n < t.curve.values.size(); ++n) {
        const double a = t.curve.bin_edges[n];
        const double b = t.curve.bin_edges[n + 1];
        if (b > 0.25 + 1e-12) break;
        worst = std::max(worst, std::abs(t.curve.values[n] - exact_phi_bin(a, b)));
        ++bins;
    }
    const bool in_time = !ws.options().fast || t.seconds < 300.0;
    r.passed = bins > 0 && worst < tol && in_time;
    r.detail = std::to_string(bins) + " bins, max |MC - exact| = " + fmt(worst) + " (tol " + fmt(tol) + "), " +
               std::to_string(t.curve.n_samples) + " samples in " + fmt(t.seconds, 3) + " s" +
               (ws.options().fast ? " (limit 300 s)" : "");
    return r;
}

Result criterion2(Workspace& ws) {
    Result r = make_result(2, "small-xi scatterer-start curve");
    const Timed& t = ws.phi0_curve();
    double worst = 0.0;
    double worst_z = 0.0;
    int bins = 0;
    for (std::size_t n = 0; n < t.curve.values.size(); ++n) {
        const double a = t.curve.bin_edges[n];
        const double b = t.curve.bin_edges[n + 1];
        if (b > 0.38 + 1e-12) break;
        const double diff = std::abs(t.curve.values[n] - exact_phi0_bin(a, b));
        worst = std::max(worst, diff);
        worst_z = std::max(worst_z, diff / t.curve.stderr_[n]);
        ++bins;
    }
    r.passed = bins > 0 && worst < 0.02 && t.seconds < 300.0;
    r.detail = std::to_string(bins) + " bins, max |MC - exact| = " + fmt(worst) + " (tol 0.02, largest z " + fmt(worst_z, 3) +
               "), " + std::to_string(t.curve.n_samples) + " probes in " + fmt(t.seconds, 3) + " s (limit 300 s)";
    return r;
}

Result criterion3(Workspace& ws) {
    Result r = make_result(3, "support of the scatterer-start path");
    const Timed& t = ws.phi0_support_curve();
    const double bound = 2.0 / std::sqrt(3.0);
    const bool below = t.curve.max_value <= bound + 1e-9;
    const bool enough = t.curve.n_samples >= 1000000;
    const bool reaches = t.curve.max_value > 1.10;
    r.passed = below && enough && (ws.options().fast || reaches);
    r.detail = "max free path " + fmt(t.curve.max_value, 8) + " over " + std::to_string(t.curve.n_samples) +
               " probes, bound 2/sqrt(3) = " + fmt(bound, 8) +
               (ws.options().fast ? " (lower check > 1.10 only at full scale" + std::string(reaches ? ", met anyway)" : ")")
                                  : reaches ? ", exceeds 1.10" : ", does not exceed 1.10");
    return r;
}

Result criterion4(Workspace& ws) {
    Result r = make_result(4, "kernel sandwich and closed form");
    McConfig cfg;
    cfg.p = 10007;
    cfg.samples = ws.options().fast ? 50000 : 400000;
    const double xis[] = {0.02, 0.05, 0.1, 0.2, 0.3};
    Rng rng(ws.options().seed, 0x6b65726eULL);
    std::vector<std::pair<Vec2, Vec2>> pairs;
    for (int i = 0; i < 40; ++i) {
        auto draw = [&] {
            const double rad = 0.95 * std::sqrt(rng.uniform());
            const double ang = 2.0 * kPi * rng.uniform();
            return Vec2(rad * std::cos(ang), rad * std::sin(ang));
        };
        const Vec2 w = draw();
        pairs.emplace_back(w, draw());
    }
    int outside = 0;
    int compared = 0;
    int mismatched = 0;
    double worst_z = 0.0;
    int k = 0;
    for (double xi : xis) {
        const KernelBounds kb = kernel_bounds(3, xi);
        for (const auto& [w, z] : pairs) {
            cfg.seed = mix_seed(ws.options().seed, static_cast<std::uint64_t>(k++));
            const Estimate e = mc_phi0_kernel(xi, w, z, cfg);
            if (e.value < kb.lower - 3.0 * e.stderr_ || e.value > kb.upper + 3.0 * e.stderr_) ++outside;
            if (xi <= xi1(w, z)) {
                const double exact = exact_kernel(xi, w, z);
                const double q = exact * zeta(3);
                const double sigma = std::sqrt(q * (1.0 - q) / static_cast<double>(cfg.samples)) / zeta(3);
                const double zscore = std::abs(e.value - exact) / sigma;
                worst_z = std::max(worst_z, zscore);
                ++compared;
                if (zscore > 3.0) ++mismatched;
            }
        }
    }
    r.passed = outside == 0 && mismatched == 0;
    r.detail = std::to_string(k) + " estimates (" + std::to_string(cfg.samples) + " samples each), " +
               std::to_string(outside) + " outside the sandwich; " + std::to_string(compared) +
               " closed-form comparisons, " + std::to_string(mismatched) + " beyond 3 sigma (max " + fmt(worst_z, 3) +
               " sigma)";
    return r;
}

Result criterion5(Workspace& ws) {
    Result r = make_result(5, "large-xi tail");
    const Timed& t = ws.phi_tail_curve();
    const double coef = kPi / (48.0 * zeta(3));
    double worst = 0.0;
    double lo_ratio = 1e300;
    double hi_ratio = 0.0;
    double mass = 0.0;
    double exact_mass = 0.0;
    int bins = 0;
    for (std::size_t n = 0; n < t.curve.values.size(); ++n) {
        const double a = t.curve.bin_edges[n];
        const double b = t.curve.bin_edges[n + 1];
        if (a < 3.0 - 1e-12 || b > 5.0 + 1e-12) continue;
        const double asym = coef * (1.0 / a - 1.0 / b) / (b - a);
        const double ratio = t.curve.values[n] / asym;
        lo_ratio = std::min(lo_ratio, ratio);
        hi_ratio = std::max(hi_ratio, ratio);
        worst = std::max(worst, std::abs(ratio - 1.0));
        mass += t.curve.values[n] * (b - a);
        exact_mass += asym * (b - a);
        ++bins;
    }
    // Independent reading of the same mass from billiard flights, reported
    // next to the lattice estimate so a miss can be told apart from a bug.
    BilliardConfig flights;
    flights.rho = 0.02;
    flights.n = ws.options().fast ? 200000 : 2000000;
    flights.seed = ws.options().seed;
    const std::vector<double> ends{3.0, 5.0};
    const CurveEstimate ccdf = empirical_ccdf(sample_paths(flights), ends);
    const double billiard_ratio = (ccdf.values[0] - ccdf.values[1]) / exact_mass;

    r.passed = bins > 0 && worst <= 0.25;
    r.detail = std::to_string(bins) + " bins on [3,5], MC / asymptote in [" + fmt(lo_ratio, 3) + ", " + fmt(hi_ratio, 3) +
               "], pooled " + fmt(mass / exact_mass, 3) + " (band 0.75..1.25), " +
               std::to_string(t.curve.n_samples) + " samples" + (ws.options().fast ? " at desk scale" : "") +
               "; billiard rho=0.02 gives " + fmt(billiard_ratio, 3) + " over " + std::to_string(flights.n) + " flights";
    return r;
}

Result criterion6(Workspace& ws) {
    Result r = make_result(6, "large-xi profile identities");
    std::ostringstream detail;
    bool ok = true;

    using boost::math::quadrature::gauss_kronrod;
    const double f2_int = gauss_kronrod<double, 31>::integrate([](double t) { return f2(t); }, 0.0, 1.0, 10, 1e-15) +
                          gauss_kronrod<double, 31>::integrate([](double t) { return f2(t); }, 1.0, 3.0, 10, 1e-15);
    const double f2_target = 1.0 / (2.0 * kPi * kPi);
    const bool f2_ok = std::abs(f2_int - f2_target) < 1e-12 && std::abs(f_integral_exact(2) - f2_target) < 1e-15;
    ok = ok && f2_ok;
    detail << "int F2 = " << fmt(f2_int, 15) << " vs 1/(2 pi^2) " << (f2_ok ? "ok" : "FAIL");

    const XiCache& table = ws.xi_table();
    const double f3_int = f_d_integral(table);
    const double f3_target = 1.0 / (96.0 * zeta(3));
    const double rel = std::abs(f3_int / f3_target - 1.0);
    ok = ok && rel < 0.15;
    detail << "; int F3 = " << fmt(f3_int, 5) << " vs 1/(96 zeta(3)) = " << fmt(f3_target, 5) << " (rel " << fmt(rel, 3)
           << ", tol 0.15)";

    // F_3 vanishes from t* = xi0(0)^{2/3} on and is positive inside.
    const double t_star = std::pow(xi0_zero(3), 2.0 / 3.0);
    bool support_ok = f_d_quad(0.8 * t_star, table) > 0.0 && g_d_quad(0.8 * t_star, table) > 0.0;
    for (int i = 0; i <= 10; ++i) {
        const double t = t_star * (1.0 + 0.1 * i);
        support_ok = support_ok && f_d_quad(t, table) == 0.0 && g_d_quad(t, table) == 0.0;
    }
    ok = ok && support_ok;
    detail << "; support edge t* = " << fmt(t_star, 6) << " (table edge " << fmt(f_d_support(table), 5) << ") "
           << (support_ok ? "ok" : "FAIL");

    const HeckeSampler planar(2, 10007);
    const std::uint64_t n = ws.options().fast ? 100000 : 1000000;
    const double pts[][3] = {{0.3, 0.6, 0.0}, {0.2, 0.5, 0.4}, {0.5, 0.8, 0.1}};
    double worst_z = 0.0;
    std::uint64_t s = mix_seed(ws.options().seed, 0x6630ULL);
    for (const auto& p : pts) {
        const Estimate a = f0d_quad(p[0], p[1], p[2], planar, n, s++);
        const Estimate b = f0d_quad(p[1], p[0], p[2], planar, n, s++);
        worst_z = std::max(worst_z, std::abs(a.value - b.value) / std::hypot(a.stderr_, b.stderr_));
    }
    const double edge = f0d_quad(1.02 * t_star, 1.02 * t_star, 0.0, planar, n / 10, s++).value;
    const double far = f0d_quad(2.5, 0.3, 0.0, planar, n / 10, s++).value;
    const bool f0_ok = worst_z <= 3.0 && edge == 0.0 && far == 0.0;
    ok = ok && f0_ok;
    detail << "; F0 symmetry max " << fmt(worst_z, 3) << " sigma, F0 beyond support " << fmt(edge) << ", " << fmt(far) << " "
           << (f0_ok ? "ok" : "FAIL");
    r.passed = ok;
    r.detail = detail.str();
    return r;
}

// Brute force over a cube of raw-basis coefficients.
std::vector<Vec> brute_points(const Mat& basis, const Vec& shift, const Box& box,
                              const std::function<bool(std::span<const double>)>& contains) {
    const auto d = static_cast<int>(basis.rows());
    const Mat inv = basis.inverse();
    std::int64_t k = 0;
    for (int i = 0; i < d; ++i) {
        double reach = 0.0;
        for (int j = 0; j < d; ++j)
            reach += std::max(std::abs(box.lo[j] - shift[j]), std::abs(box.hi[j] - shift[j])) * std::abs(inv(j, i));
        k = std::max<std::int64_t>(k, static_cast<std::int64_t>(std::ceil(reach)) + 1);
    }
    std::vector<Vec> out;
    std::vector<std::int64_t> c(static_cast<std::size_t>(d), -k);
    for (;;) {
        Vec x = shift;
        for (int i = 0; i < d; ++i) x += static_cast<double>(c[static_cast<std::size_t>(i)]) * basis.row(i).transpose();
        if (contains(std::span<const double>(x.data(), static_cast<std::size_t>(d)))) out.push_back(x);
        int i = d - 1;
        while (i >= 0 && c[static_cast<std::size_t>(i)] == k) c[static_cast<std::size_t>(i--)] = -k;
        if (i < 0) break;
        ++c[static_cast<std::size_t>(i)];
    }
    return out;
}

bool same_points(std::vector<Vec> a, std::vector<Vec> b) {
    if (a.size() != b.size()) return false;
    auto less = [](const Vec& x, const Vec& y) {
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
    };
    std::sort(a.begin(), a.end(), less);
    std::sort(b.begin(), b.end(), less);
    for (std::size_t i = 0; i < a.size(); ++i)
        if ((a[i] - b[i]).lpNorm<Eigen::Infinity>() > 1e-9) return false;
    return true;
}

template <Region R>
bool check_region(const LatticeBasis& lattice, const R& region) {
    const auto fast = enumerate_points(lattice, region);
    const auto slow = brute_points(lattice.basis(), lattice.shift(), region.bounding_box(),
                                   [&](std::span<const double> x) { return region.contains(x); });
    if (!same_points(fast, slow)) return false;
    return is_disjoint(lattice, region) == slow.empty();
}

std::string enumeration_part(std::uint64_t seed, bool& ok) {
    Rng rng(seed, 0x656e756dULL);
    int trials = 0;
    int failures = 0;
    for (int t = 0; t < 240; ++t) {
        const int d = 2 + t % 3;
        Mat b(d, d);
        do {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) b(i, j) = rng.normal() * 0.6;
        } while (std::abs(b.determinant()) < 0.15);
        Vec shift(d);
        for (int j = 0; j < d; ++j) shift[j] = rng.uniform(-1.0, 1.0);
        const LatticeBasis lattice(b, t % 2 == 0 ? Vec(shift) : Vec(Vec::Zero(d)));
        Vec c(d);
        for (int j = 0; j < d; ++j) c[j] = rng.uniform(-1.0, 1.0);
        bool good = true;
        switch (t / 3 % 4) {
            case 0: good = check_region(lattice, Ball{c, rng.uniform(0.3, 2.0)}); break;
            case 1: {
                Vec perp = c.tail(d - 1);
                good = check_region(lattice, Cylinder(rng.uniform(-2.0, 0.0), rng.uniform(0.2, 2.5), rng.uniform(0.2, 1.5), perp));
                break;
            }
            case 2: {
                Box box{c.array() - rng.uniform(0.2, 1.5), c.array() + rng.uniform(0.2, 1.5)};
                good = check_region(lattice, OpenBox{box});
                break;
            }
            default: {
                Vec h(d);
                h[0] = rng.uniform(0.2, 1.0);
                for (int j = 1; j < d; ++j) h[j] = rng.uniform(-1.0, 1.0);
                Vec y(d);
                y[0] = rng.uniform(-0.5, 0.5);
                for (int j = 1; j < d; ++j) y[j] = rng.uniform(-0.5, 0.5);
                good = check_region(lattice, CutParaboloid(y, h));
            }
        }
        ++trials;
        if (!good) ++failures;
    }
    ok = failures == 0;
    return "enumeration " + std::to_string(trials - failures) + "/" + std::to_string(trials) + " match brute force";
}

std::string map_part(std::uint64_t seed, bool& ok) {
    Rng rng(seed, 0x6d617073ULL);
    double worst = 0.0;
    int membership_mismatch = 0;
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 3;
        auto draw_alpha = [&] { return rng.uniform(0.3, 2.0); };
        const ParaboloidMap f(n, draw_alpha(), rng.uniform(-1.5, 1.5));
        const ParaboloidMap g(n, draw_alpha(), rng.uniform(-1.5, 1.5));
        Vec y(n);
        for (int j = 0; j < n; ++j) y[j] = rng.uniform(-2.0, 2.0);
        const ParaboloidMap fg = f.then(g);
        worst = std::max(worst, (fg.apply(y) - g.apply(f.apply(y))).lpNorm<Eigen::Infinity>());
        worst = std::max(worst, std::abs(fg.alpha() - f.alpha() * g.alpha()));
        worst = std::max(worst, std::abs(fg.beta() - (f.beta() * g.alpha() + g.beta())));
        worst = std::max(worst, (f.inverse().apply(f.apply(y)) - y).lpNorm<Eigen::Infinity>());
        worst = std::max(worst, std::abs(f.determinant() - std::pow(f.alpha(), n + 1)));
        const ParaboloidMap id(n, 1.0, 0.0);
        worst = std::max(worst, (id.apply(y) - y).lpNorm<Eigen::Infinity>());
        // The paraboloid is preserved, and so is membership in a cut region.
        const double defect = [&] {
            const Vec u = f.apply(y);
            double s = -1.0;
            for (int j = 1; j < n; ++j) s += u[j] * u[j];
            double s0 = -1.0;
            for (int j = 1; j < n; ++j) s0 += y[j] * y[j];
            return std::abs((u[0] - s) - f.alpha() * f.alpha() * (y[0] - s0));
        }();
        worst = std::max(worst, defect);
        Vec h(n);
        h[0] = rng.uniform(0.2, 1.0);
        for (int j = 1; j < n; ++j) h[j] = rng.uniform(-1.0, 1.0);
        Vec base(n);
        base[0] = rng.uniform(0.0, 1.0);
        for (int j = 1; j < n; ++j) base[j] = rng.uniform(-0.5, 0.5);
        const XiQuery q{base, base, h, 1.0};
        const XiQuery image = transform_query(q, f);
        const CutParaboloid before(q.y, q.h);
        const CutParaboloid after(image.y, image.h);
        const Mat m = f.linear();
        for (int k = 0; k < 50; ++k) {
            Vec x(n);
            for (int j = 0; j < n; ++j) x[j] = rng.uniform(-2.0, 2.0);
            const Vec xm = (x.transpose() * m).transpose();
            const bool in_before = before.contains(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
            const bool in_after = after.contains(std::span<const double>(xm.data(), static_cast<std::size_t>(n)));
            if (in_before != in_after) {
                // Only points within rounding of the boundary may disagree.
                double s = -1.0;
                for (int j = 1; j < n; ++j) s += (x[j] + q.y[j]) * (x[j] + q.y[j]);
                const double margin = std::min(std::abs(x[0] + q.y[0] - s), std::abs(h.dot(x)));
                if (margin > 1e-9) ++membership_mismatch;
            }
        }
    }
    ok = worst <= 1e-12 && membership_mismatch == 0;
    return "paraboloid maps max defect " + fmt(worst, 3) + ", " + std::to_string(membership_mismatch) +
           " membership mismatches";
}

std::string siegel_part(std::uint64_t seed, bool& ok) {
    const HeckeSampler planar(2, 10007);
    int violations = 0;
    int checks = 0;
    const double sigmas[] = {0.0, 0.5, 2.0, 5.0};
    const double vs[] = {1.0, 5.0, 20.0, 60.0, 200.0};
    std::uint64_t s = seed;
    for (double sigma : sigmas) {
        double prev = -1.0;
        double prev_err = 0.0;
        for (double v : vs) {
            const XiQuery q = XiQuery::single(2, sigma, v);
            const Estimate e = xi_estimate(q, planar, 4000, mix_seed(s++, 0x7369ULL));
            const double area = CutParaboloid(q.y, q.h).area_2d();
            ++checks;
            if (e.value < 1.0 - area / v - 3.0 * e.stderr_ || e.value > 1.0) ++violations;
            if (prev >= 0.0 && prev > e.value + 3.0 * (prev_err + e.stderr_)) ++violations;
            prev = e.value;
            prev_err = e.stderr_;
        }
    }
    ok = violations == 0;
    return "probability sandwich/monotonicity " + std::to_string(checks) + " points, " + std::to_string(violations) +
           " violations";
}

std::string normalisation_part(Workspace& ws, bool& ok) {
    const CurveEstimate& c = ws.phi_curve().curve;
    double total = c.tail_mass;
    for (std::size_t i = 0; i < c.values.size(); ++i) total += c.values[i] * (c.bin_edges[i + 1] - c.bin_edges[i]);
    const double sigma = std::sqrt(1.0 / static_cast<double>(c.n_samples));
    ok = std::abs(total - 1.0) <= 3.0 * sigma;
    return "curve mass + tail - 1 = " + fmt(total - 1.0, 3);
}

std::string symmetry_part(std::uint64_t seed, bool& ok) {
    McConfig cfg;
    cfg.p = 10007;
    cfg.samples = 40000;
    Rng rng(seed, 0x73796dULL);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        auto draw = [&] {
            const double rad = 0.9 * std::sqrt(rng.uniform());
            const double ang = 2.0 * kPi * rng.uniform();
            return Vec2(rad * std::cos(ang), rad * std::sin(ang));
        };
        const Vec2 w = draw();
        const Vec2 z = draw();
        const double xi = rng.uniform(0.05, 0.8);
        cfg.seed = mix_seed(seed, 2 * i);
        const Estimate a = mc_phi0_kernel(xi, w, z, cfg);
        cfg.seed = mix_seed(seed, 2 * i + 1);
        const Estimate b = mc_phi0_kernel(xi, z, w, cfg);
        const double se = std::hypot(a.stderr_, b.stderr_);
        if (se > 0.0) worst = std::max(worst, std::abs(a.value - b.value) / se);
    }
    ok = worst <= 3.0;
    return "kernel (w,z) swap max " + fmt(worst, 3) + " sigma over 10 pairs";
}

std::string xi1_part(bool& ok) {
    // xi1 is invariant under a common rotation of w and z, so w is put on
    // the first axis.
    int bad = 0;
    int points = 0;
    double lowest = 1.0;
    for (int a = 0; a <= 4; ++a) {
        for (int b = 0; b <= 4; ++b) {
            for (int k = 0; k < 12; ++k) {
                const double rw = a / 4.0;
                const double rz = b / 4.0;
                const double ang = kPi * k / 6.0;
                const Vec2 w(rw, 0.0);
                const Vec2 z(rz * std::cos(ang), rz * std::sin(ang));
                const double x = xi1(w, z);
                ++points;
                lowest = std::min(lowest, x);
                const bool quarter = a == 4 && b == 4 && (k == 3 || k == 9);
                const bool one = a == 0 && b == 0;
                if (x < 0.25 - 1e-9 || x > 1.0 + 1e-9) ++bad;
                if (quarter != (std::abs(x - 0.25) < 1e-8)) ++bad;
                if (one != (std::abs(x - 1.0) < 1e-8)) ++bad;
            }
        }
    }
    ok = bad == 0;
    return "xi1 bounds on " + std::to_string(points) + " grid points (min " + fmt(lowest, 10) + "), " +
           std::to_string(bad) + " violations";
}

std::string g_part(bool& ok) {
    const double g0 = kPi * (4.0 * kPi + 3.0 * std::sqrt(3.0)) / 16.0;
    const double g1 = 5.0 * kPi * kPi / 16.0 + 1.0;
    const double e0 = std::abs(g_of_w(0.0) - g0);
    const double e1 = std::abs(g_of_w(1.0) - g1);
    ok = e0 < 1e-9 && e1 < 1e-9;
    return "G(0), G(1) errors " + fmt(e0, 2) + ", " + fmt(e1, 2);
}

Result criterion7(Workspace& ws) {
    Result r = make_result(7, "property suites");
    const std::uint64_t seed = ws.options().seed;
    bool all = true;
    std::string detail;
    auto add = [&](const std::string& part, bool ok) {
        all = all && ok;
        if (!detail.empty()) detail += "; ";
        detail += part + (ok ? "" : " FAIL");
    };
    bool ok = false;
    std::string s = enumeration_part(seed, ok);
    add(s, ok);
    s = map_part(seed, ok);
    add(s, ok);
    s = siegel_part(seed, ok);
    add(s, ok);
    s = normalisation_part(ws, ok);
    add(s, ok);
    s = symmetry_part(seed, ok);
    add(s, ok);
    s = xi1_part(ok);
    add(s, ok);
    s = g_part(ok);
    add(s, ok);
    r.passed = all;
    r.detail = detail;
    return r;
}

Result criterion8(Workspace& ws) {
    Result r = make_result(8, "billiard cross-validation");
    const CurveEstimate& phi = ws.phi_curve().curve;
    const std::vector<double> survival = curve_survival(phi);
    std::vector<double> grid;
    std::vector<double> limit;
    for (std::size_t i = 0; i < phi.bin_edges.size(); ++i) {
        if (phi.bin_edges[i] > 2.0 + 1e-12) break;
        grid.push_back(phi.bin_edges[i]);
        limit.push_back(survival[i]);
    }
    auto sup_distance = [&](double rho) {
        BilliardConfig cfg;
        cfg.rho = rho;
        cfg.n = 100000;
        cfg.seed = ws.options().seed;
        const std::vector<PathSample> samples = sample_paths(cfg);
        const CurveEstimate ccdf = empirical_ccdf(samples, grid);
        double sup = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) sup = std::max(sup, std::abs(ccdf.values[i] - limit[i]));
        return sup;
    };
    ws.log("running billiard flights at rho = 0.02 and 0.2");
    const double near = sup_distance(0.02);
    const double coarse = sup_distance(0.2);
    r.passed = near < 0.05 && near < coarse;
    r.detail = "sup |ccdf - limit| on [0,2]: " + fmt(near, 3) + " at rho=0.02 (tol 0.05), " + fmt(coarse, 3) +
               " at rho=0.2";
    return r;
}

}  // namespace

Suite parse_suite(const std::string& name) {
    if (name == "small-xi") return Suite::small_xi;
    if (name == "tail") return Suite::tail;
    if (name == "support") return Suite::support;
    if (name == "invariants") return Suite::invariants;
    if (name == "all") return Suite::all;
    throw DomainError("--suite must be one of small-xi, tail, support, invariants, all (got '" + name + "')");
}

std::string to_string(Suite suite) {
    switch (suite) {
        case Suite::small_xi: return "small-xi";
        case Suite::tail: return "tail";
        case Suite::support: return "support";
        case Suite::invariants: return "invariants";
        case Suite::all: return "all";
    }
    return "all";
}

std::vector<int> suite_criteria(Suite suite) {
    switch (suite) {
        case Suite::small_xi: return {1, 2, 4};
        case Suite::tail: return {5, 6};
        case Suite::support: return {3};
        case Suite::invariants: return {7, 8};
        case Suite::all: return {1, 2, 3, 4, 5, 6, 7, 8};
    }
    return {};
}

std::vector<Result> run(const std::vector<int>& criteria, const Options& options,
                        const std::function<void(const Result&)>& on_result) {
    Workspace ws(options);
    std::vector<Result> out;
    for (int c : criteria) {
        const auto t0 = Clock::now();
        Result r;
        try {
            switch (c) {
                case 1: r = criterion1(ws); break;
                case 2: r = criterion2(ws); break;
                case 3: r = criterion3(ws); break;
                case 4: r = criterion4(ws); break;
                case 5: r = criterion5(ws); break;
                case 6: r = criterion6(ws); break;
                case 7: r = criterion7(ws); break;
                case 8: r = criterion8(ws); break;
                default: throw DomainError("no criterion " + std::to_string(c));
            }
        } catch (const DomainError&) {
            throw;
        } catch (const std::exception& e) {
            r = make_result(c, "criterion " + std::to_string(c));
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = seconds_since(t0);
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

std::string format(const Result& r) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.1f", r.seconds);
    return std::string(r.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(r.criterion) + " (" + r.title +
           "): " + r.detail + " [" + secs + " s]";
}

}  // namespace lorentz::validation
