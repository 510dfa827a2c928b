#include "lorentz/tail.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <vector>

#include "lorentz/error.hpp"
#include "lorentz/parallel.hpp"
#include "lorentz/special.hpp"
#include "lorentz/xi_cache.hpp"

namespace lorentz {
namespace {

constexpr double kPi = std::numbers::pi;

void check_dim_range(int d, int lo) {
    if (d < lo) throw DomainError("dimension must be at least " + std::to_string(lo));
}

Estimate binomial(std::uint64_t hits, std::uint64_t n) {
    const double p = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    return {p, n ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0, n};
}

/// Count successes of `trial(rng)` over n independent streams (seed, offset + i).
template <class Trial>
std::uint64_t count_successes(std::uint64_t n, std::uint64_t seed, std::uint64_t offset, Trial trial) {
    std::atomic<std::uint64_t> hits{0};
    parallel_ranges(n, [&](std::size_t begin, std::size_t end) {
        std::uint64_t local = 0;
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(seed, offset + i);
            if (trial(rng)) ++local;
        }
        hits.fetch_add(local);
    });
    return hits.load();
}

/// Gauss-Legendre over [a, b] split at the given interior breakpoints.
template <class F>
double piecewise_gauss(F f, double a, double b, std::vector<double> breaks) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double lo = std::max(a, breaks[k]);
        const double hi = std::min(b, breaks[k + 1]);
        if (hi > lo) total += boost::math::quadrature::gauss<double, 10>::integrate(f, lo, hi);
    }
    return total;
}

/// Integral over sigma > 0 of Xi(sigma, v) sigma^(d-3), cut off at 8, 16, ...
/// until one doubling adds less than 0.5%.
double sigma_integral_adaptive(const XiCache& cache, double v) {
    const XiGrid& g = cache.grid();
    const int power = g.dim - 2;
    const double step = g.sigma_max / (g.n_sigma - 1);
    double cut = 8.0;
    int node = std::min(g.n_sigma - 1, static_cast<int>(std::lround(cut / step)));
    double value = cache.sigma_integral(v, node, power);
    for (;;) {
        if (node == g.n_sigma - 1) {
            // Already at the table edge: accept only if the last doubling converged.
            return value;
        }
        cut *= 2.0;
        const int next = std::min(g.n_sigma - 1, static_cast<int>(std::lround(cut / step)));
        const double wider = cache.sigma_integral(v, next, power);
        if (wider <= 0.0 || wider - value < 0.005 * wider) return wider;
        if (next == g.n_sigma - 1)
            throw CoverageError("Xi table does not reach far enough in sigma for v = " + std::to_string(v));
        value = wider;
        node = next;
    }
}

double kappa_of(double t, int d) { return std::pow(2.0, 1.0 - 0.5 * d) * std::pow(t, -0.5 * d); }

double t_of_kappa(double kappa, int d) { return std::pow(std::pow(2.0, 1.0 - 0.5 * d) / kappa, 2.0 / d); }

/// Integral over y in (0,1) of H(kappa y) * weight(y), split at the table's v-nodes.
template <class W>
double y_integral(const XiCache& cache, double kappa, W weight) {
    const XiGrid& g = cache.grid();
    if (kappa > g.v_max * (1.0 + 1e-12)) throw CoverageError("Xi table does not reach v = " + std::to_string(kappa));
    std::vector<double> breaks;
    for (int j = 0; j < g.n_v; ++j) {
        const double y = cache.v_node(j) / kappa;
        if (y > 0.0 && y < 1.0) breaks.push_back(y);
    }
    const double y_lo = std::min(1.0, g.v_min / kappa);
    return piecewise_gauss(
        [&](double y) { return sigma_integral_adaptive(cache, kappa * y) * weight(y); }, y_lo, 1.0, breaks);
}

}  // namespace

double phi_tail_coefficient(int d) {
    check_dim_range(d, 2);
    return std::pow(kPi, 0.5 * (d - 1)) / (std::ldexp(1.0, d) * d * std::tgamma(0.5 * (d + 3)) * zeta(d));
}

double phi_tail(double xi, int d) {
    if (!(xi > 0.0)) throw DomainError("xi must be positive");
    return phi_tail_coefficient(d) / (xi * xi);
}

double phibar0_tail_coefficient(int d) {
    check_dim_range(d, 2);
    return std::ldexp(1.0, 2 - d) / (d * (d + 1) * zeta(d));
}

double phibar0_tail(double xi, int d) {
    if (!(xi > 0.0)) throw DomainError("xi must be positive");
    return phibar0_tail_coefficient(d) / (xi * xi * xi);
}

double xi0_zero(int d) {
    switch (d) {
        case 2: return 1.0;
        case 3: return 2.0 / std::sqrt(3.0);
        case 4: return std::sqrt(2.0);
        default:
            throw DomainError(
                "support bound at w = 0 is only known for d = 2, 3, 4; for d >= 5 it is bracketed by "
                "lattice packing densities in dimensions d-1 and d");
    }
}

double f2(double t) {
    if (!(t >= 0.0)) throw DomainError("t must be non-negative");
    const double u = std::max(0.0, 1.0 - t);
    return 1.5 / (kPi * kPi) * u * u;
}

double f02(double t1, double t2) {
    if (!(t1 >= 0.0 && t2 >= 0.0)) throw DomainError("t1, t2 must be non-negative");
    return 3.0 / (kPi * kPi) * std::max(0.0, 1.0 - std::max(t1, t2));
}

double f_integral_exact(int d) {
    check_dim_range(d, 2);
    return std::ldexp(1.0, 1 - d) / ((d - 1.0) * d * (d + 1.0) * zeta(d));
}

ParaboloidMap::ParaboloidMap(int dim, double alpha, double beta) : dim_(dim), alpha_(alpha), beta_(beta) {
    if (dim < 2 || dim > kMaxDim) throw DomainError("paraboloid maps need dimension 2..4");
    if (!(alpha > 0.0) || !std::isfinite(beta)) throw DomainError("paraboloid map needs alpha > 0");
}

Mat ParaboloidMap::linear() const {
    Mat m = Mat::Identity(dim_, dim_) * alpha_;
    m(0, 0) = alpha_ * alpha_;
    m(1, 0) = 2.0 * alpha_ * beta_;
    return m;
}

Vec ParaboloidMap::translation() const {
    Vec s = Vec::Zero(dim_);
    s[0] = alpha_ * alpha_ + beta_ * beta_ - 1.0;
    s[1] = beta_;
    return s;
}

double ParaboloidMap::determinant() const { return std::pow(alpha_, dim_ + 1); }

Vec ParaboloidMap::apply(const Vec& y) const {
    if (y.size() != dim_) throw DomainError("point dimension does not match map");
    return (y.transpose() * linear()).transpose() + translation();
}

ParaboloidMap ParaboloidMap::then(const ParaboloidMap& next) const {
    if (next.dim_ != dim_) throw DomainError("composing maps of different dimension");
    return {dim_, alpha_ * next.alpha_, beta_ * next.alpha_ + next.beta_};
}

ParaboloidMap ParaboloidMap::inverse() const { return {dim_, 1.0 / alpha_, -beta_ / alpha_}; }

XiQuery XiQuery::single(int dim, double sigma, double v) {
    if (dim < 1 || dim > kMaxDim) throw DomainError("lattice dimension must be 1..4");
    XiQuery q{Vec::Zero(dim), Vec::Zero(dim), Vec::Zero(dim), v};
    q.h[0] = 1.0;
    if (dim > 1) q.h[1] = sigma;
    return q;
}

XiQuery XiQuery::normalized(double a, double b, const Vec& h, double v) {
    if (!(a > 0.0)) throw DomainError("normalized pair needs a > 0");
    const auto n = static_cast<int>(h.size());
    if (n < 2) throw DomainError("normalized pair needs dimension at least 2");
    XiQuery q{Vec::Zero(n), Vec::Zero(n), h, v};
    q.y2[0] = a * a + b * b - 1.0;
    q.y2[1] = b;
    return q;
}

XiQuery transform_query(const XiQuery& q, const ParaboloidMap& map) {
    const Mat m = map.linear();
    const Vec h = (q.h.transpose() * m.inverse().transpose()).transpose();
    return {map.apply(q.y), map.apply(q.y2), h, q.v * std::abs(map.determinant())};
}

NormalizedPair normalize_pair(const Vec& y, const Vec& y2) {
    const auto n = static_cast<int>(y.size());
    if (n < 2 || y2.size() != n) throw DomainError("pair needs two points of the same dimension >= 2");
    for (int j = 2; j < n; ++j)
        if (y[j] != 0.0 || y2[j] != 0.0) throw DomainError("pair must lie in the span of e1 and e2");
    const double gap = 1.0 + y[0] - y[1] * y[1];
    const double gap2 = 1.0 + y2[0] - y2[1] * y2[1];
    if (!(gap > 0.0) || !(gap2 > 0.0)) throw DomainError("both points must lie inside the paraboloid");
    const double alpha = std::sqrt(gap);
    return {std::sqrt(gap2 / gap), (y2[1] - y[1]) / alpha, ParaboloidMap(n, alpha, y[1])};
}

XiQuery swap_normalized(double a, double b, const Vec& h, double v) {
    if (!(a > 0.0)) throw DomainError("normalized pair needs a > 0");
    Vec g = h;
    g[0] = a * h[0];
    g[1] = -2.0 * b * h[0] - h[1];
    const int d = static_cast<int>(h.size()) + 1;
    return XiQuery::normalized(1.0 / a, b / a, g, std::pow(a, -d) * v);
}

bool xi_avoids(const XiQuery& q, const LatticeBasis& unimodular) {
    const int n = q.dim();
    if (unimodular.dim() != n) throw DomainError("lattice and query dimensions differ");
    if (!(q.v > 0.0)) throw DomainError("covolume v must be positive");
    const LatticeBasis lattice = unimodular.scaled(std::pow(q.v / unimodular.covolume(), 1.0 / n));
    const CutParaboloid first(q.y, q.h);
    if (q.y == q.y2) return is_disjoint(lattice, first);
    return is_disjoint(lattice, RegionUnion<CutParaboloid, CutParaboloid>{first, CutParaboloid(q.y2, q.h)});
}

Estimate xi_estimate(const XiQuery& q, const HeckeSampler& sampler, std::uint64_t samples, std::uint64_t seed) {
    if (samples == 0) throw DomainError("need at least one sample");
    if (sampler.dim() != q.dim()) throw DomainError("sampler and query dimensions differ");
    const std::uint64_t hits =
        count_successes(samples, seed, 0, [&](Rng& rng) { return xi_avoids(q, sampler.sample(rng)); });
    return binomial(hits, samples);
}

Estimate siegel_mean(const CutParaboloid& region, std::uint64_t samples, std::uint64_t seed) {
    if (samples == 0) throw DomainError("need at least one sample");
    const Box box = region.bounding_box();
    if (box.empty()) return {0.0, 0.0, samples};
    const double volume = (box.hi - box.lo).prod();
    const int n = region.dim();
    const std::uint64_t hits = count_successes(samples, seed, 0, [&](Rng& rng) {
        double x[kMaxDim];
        for (int j = 0; j < n; ++j) x[j] = rng.uniform(box.lo[j], box.hi[j]);
        return region.contains(std::span<const double>(x, static_cast<std::size_t>(n)));
    });
    const Estimate f = binomial(hits, samples);
    return {volume * f.value, volume * f.stderr_, samples};
}

Estimate paraboloid_normalisation(const HeckeSampler& sampler, double x_max, std::uint64_t samples,
                                  std::uint64_t seed) {
    if (!(x_max > -1.0)) throw DomainError("truncation must exceed -1");
    if (samples == 0) throw DomainError("need at least one sample");
    const int n = sampler.dim();
    const double top = 1.0 + x_max;
    const double volume = v_ball(n - 1) * std::pow(top, 0.5 * (n + 1)) / (0.5 * (n + 1));
    Vec e1 = Vec::Zero(n);
    e1[0] = 1.0;
    const std::uint64_t hits = count_successes(samples, seed, 0, [&](Rng& rng) {
        // y1 + 1 has density proportional to (y1 + 1)^{(n-1)/2}; y' uniform in its ball.
        const double lift = top * std::pow(rng.uniform(), 2.0 / (n + 1));
        Vec y(n);
        y[0] = lift - 1.0;
        double r2;
        do {
            r2 = 0.0;
            for (int j = 1; j < n; ++j) {
                y[j] = rng.uniform(-1.0, 1.0);
                r2 += y[j] * y[j];
            }
        } while (r2 >= 1.0);
        for (int j = 1; j < n; ++j) y[j] *= std::sqrt(lift);
        const XiQuery q{y, y, e1, 1.0};
        return xi_avoids(q, sampler.sample(rng));
    });
    const Estimate f = binomial(hits, samples);
    return {volume * f.value, volume * f.stderr_, samples};
}

double f_d_quad(double t, const XiCache& cache) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    const int d = cache.dim() + 1;
    check_dim_range(d, 3);
    const double c = std::pow(2.0, 3.0 * (1.0 - 0.5 * d)) * std::pow(kPi, 0.5 * d - 1.0) /
                     ((d - 1.0) * std::tgamma(0.5 * d - 1.0) * zeta(d));
    const double kappa = kappa_of(t, d);
    return c * std::pow(t, 0.5 * d - 1.0) * y_integral(cache, kappa, [d](double y) { return std::pow(1.0 - y, d - 1); });
}

double g_d_quad(double t, const XiCache& cache) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    const int d = cache.dim() + 1;
    check_dim_range(d, 3);
    const double c = std::pow(2.0, 3.0 * (1.0 - 0.5 * d)) * std::pow(kPi, 0.5 * d - 1.0) /
                     (std::tgamma(0.5 * d - 1.0) * zeta(d));
    const double kappa = kappa_of(t, d);
    return c * std::pow(t, 0.5 * d - 1.0) *
           y_integral(cache, kappa, [d](double y) { return y * std::pow(1.0 - y, d - 2); });
}

double f_d_support(const XiCache& cache) {
    const XiGrid& g = cache.grid();
    const int d = g.dim + 1;
    if (!cache.zero_below_grid()) throw CoverageError("Xi table has no all-zero column; support unknown");
    int last_zero = 0;
    for (int j = 0; j < g.n_v; ++j) {
        bool zero = true;
        for (int i = 0; i < g.n_sigma && zero; ++i) zero = cache.cell(i, j).value == 0.0;
        if (!zero) break;
        last_zero = j;
    }
    return t_of_kappa(cache.v_node(last_zero), d);
}

double f_d_integral(const XiCache& cache) {
    const XiGrid& g = cache.grid();
    const int d = g.dim + 1;
    const double t_lo = t_of_kappa(g.v_max, d);
    const double t_hi = f_d_support(cache);
    std::vector<double> breaks;
    for (int j = 0; j < g.n_v; ++j) breaks.push_back(t_of_kappa(cache.v_node(j), d));
    const double body = piecewise_gauss([&](double t) { return f_d_quad(t, cache); }, t_lo, t_hi, breaks);
    // F_d is continuous at 0, so the sliver below the table is F(t_lo) t_lo to leading order.
    return body + f_d_quad(t_lo, cache) * t_lo;
}

Estimate f0d_quad(double t1, double t2, double alpha, const HeckeSampler& sampler, std::uint64_t samples,
                  std::uint64_t seed) {
    if (!(t1 > 0.0 && t2 > 0.0)) throw DomainError("t1 and t2 must be positive");
    if (!(alpha >= 0.0)) throw DomainError("alpha must be non-negative");
    if (samples == 0) throw DomainError("need at least one sample");
    const int n = sampler.dim();
    const int d = n + 1;
    const double a = std::sqrt(t2 / t1);
    const double b = alpha / std::sqrt(2.0 * t1);
    const double kappa = kappa_of(t1, d);
    const double pref = std::pow(2.0, 2.0 - 1.5 * d) * std::pow(t1, 0.5 * d - 1.0) / zeta(d);
    const int free_dims = d - 2;

    double total = 0.0;
    double var = 0.0;
    double inner = 0.0;
    double outer = 4.0;
    for (int shell = 0; shell < 10; ++shell) {
        const double vol = std::pow(2.0 * outer, free_dims) - std::pow(2.0 * inner, free_dims);
        const std::uint64_t hits = count_successes(samples, seed, static_cast<std::uint64_t>(shell) << 40, [&](Rng& rng) {
            Vec h(n);
            h[0] = rng.uniform();
            for (;;) {
                double norm = 0.0;
                for (int j = 1; j < n; ++j) {
                    h[j] = rng.uniform(-outer, outer);
                    norm = std::max(norm, std::abs(h[j]));
                }
                if (norm >= inner) break;
            }
            if (h[0] >= 1.0) return false;
            const XiQuery q = XiQuery::normalized(a, b, h, kappa * (1.0 - h[0]));
            if (!(q.v > 0.0)) return false;
            return xi_avoids(q, sampler.sample(rng));
        });
        const Estimate f = binomial(hits, samples);
        const double part = pref * vol * f.value;
        total += part;
        var += std::pow(pref * vol * f.stderr_, 2);
        if (shell > 0 && part <= 0.005 * total) break;
        if (shell == 9) throw ConvergenceError("h-range for F0 did not close within 10 doublings");
        inner = outer;
        outer *= 2.0;
    }
    return {total, std::sqrt(var), samples};
}

}  // namespace lorentz
