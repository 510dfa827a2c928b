#include "doctest.h"

#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "lorentz/error.hpp"
#include "lorentz/special.hpp"
#include "lorentz/tail.hpp"
#include "lorentz/xi_cache.hpp"
#include "support.hpp"

using namespace lorentz;
using testing::kPi;
using testing::kZeta2;
using testing::kZeta3;

namespace {

Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

bool inside(const Vec& u) { return in_paraboloid({u.data(), static_cast<std::size_t>(u.size())}); }

// Small table shared by the profile tests.
const XiCache& small_table() {
    static const XiCache table = XiCache::build(XiGrid{}, HeckeSampler(2, 10007), 200, 99);
    return table;
}

}  // namespace

TEST_CASE("tail constants") {
    CHECK(phi_tail_coefficient(3) == doctest::Approx(kPi / (48.0 * kZeta3)));
    CHECK(phi_tail_coefficient(2) == doctest::Approx(1.0 / (6.0 * kZeta2)));
    CHECK(phibar0_tail_coefficient(3) == doctest::Approx(1.0 / (24.0 * kZeta3)));
    CHECK(phibar0_tail_coefficient(2) == doctest::Approx(1.0 / (6.0 * kZeta2)));
    for (int d = 2; d <= 6; ++d) {
        const double direct = std::pow(kPi, 0.5 * (d - 1)) /
                              (std::pow(2.0, d) * d * boost::math::tgamma(0.5 * (d + 3)) * zeta(d));
        CHECK(phi_tail_coefficient(d) == doctest::Approx(direct).epsilon(1e-13));
        CHECK(phi_tail(3.0, d) == doctest::Approx(4.0 * phi_tail(6.0, d)));
        CHECK(phibar0_tail(2.0, d) == doctest::Approx(8.0 * phibar0_tail(4.0, d)));
        // -d/dxi of the generic tail is v_{d-1} times the collision tail.
        const double xi = 7.0;
        const double h = 1e-4;
        const double deriv = -(phi_tail(xi + h, d) - phi_tail(xi - h, d)) / (2 * h);
        CHECK(deriv == doctest::Approx(v_ball(d - 1) * phibar0_tail(xi, d)).epsilon(1e-7));
    }
}

TEST_CASE("support endpoints at w = 0") {
    CHECK(xi0_zero(2) == doctest::Approx(1.0));
    CHECK(xi0_zero(3) == doctest::Approx(2.0 / std::sqrt(3.0)));
    CHECK(xi0_zero(4) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(xi0_zero(5), DomainError);
}

TEST_CASE("planar profiles") {
    CHECK(f2(0.0) == doctest::Approx(3.0 / (2.0 * kPi * kPi)));
    CHECK(f2(1.2) == 0.0);
    CHECK(f02(0.3, 0.5) == doctest::Approx(3.0 / (kPi * kPi) * 0.5));
    CHECK(f02(0.5, 0.3) == f02(0.3, 0.5));
    CHECK(f02(1.1, 0.2) == 0.0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += f2((i + 0.5) * 1.5 / n) * 1.5 / n;
    CHECK(sum == doctest::Approx(1.0 / (2.0 * kPi * kPi)).epsilon(1e-8));
    CHECK(f_integral_exact(2) == doctest::Approx(1.0 / (2.0 * kPi * kPi)));
    CHECK(f_integral_exact(3) == doctest::Approx(1.0 / (96.0 * kZeta3)));
}

TEST_CASE("paraboloid maps") {
    SUBCASE("identity and explicit form") {
        const ParaboloidMap id(2, 1.0, 0.0);
        const Vec y = vec({0.3, -0.7});
        CHECK((id.apply(y) - y).norm() < 1e-15);
        const double a = 1.7, b = -0.4;
        const ParaboloidMap t(3, a, b);
        Mat m(3, 3);
        m << a * a, 0, 0, 2 * a * b, a, 0, 0, 0, a;
        CHECK((t.linear() - m).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((t.translation() - vec({a * a + b * b - 1.0, b, 0.0})).norm() < 1e-15);
        CHECK(t.determinant() == doctest::Approx(std::pow(a, 4)));
    }
    SUBCASE("composition and inverse laws") {
        Rng rng(14);
        for (int i = 0; i < 100; ++i) {
            const int n = 2 + i % 3;
            const ParaboloidMap s(n, rng.uniform(0.3, 2.0), rng.uniform(-1.5, 1.5));
            const ParaboloidMap t(n, rng.uniform(0.3, 2.0), rng.uniform(-1.5, 1.5));
            const ParaboloidMap st = s.then(t);
            CHECK(std::abs(st.alpha() - s.alpha() * t.alpha()) < 1e-12);
            CHECK(std::abs(st.beta() - (s.beta() * t.alpha() + t.beta())) < 1e-12);
            const ParaboloidMap inv = s.inverse();
            CHECK(std::abs(inv.alpha() - 1.0 / s.alpha()) < 1e-12);
            CHECK(std::abs(inv.beta() + s.beta() / s.alpha()) < 1e-12);
            Vec y(n);
            for (int k = 0; k < n; ++k) y[k] = rng.uniform(-2.0, 2.0);
            CHECK((st.apply(y) - t.apply(s.apply(y))).norm() < 1e-12);
            CHECK((inv.apply(s.apply(y)) - y).norm() < 1e-12);
        }
    }
    SUBCASE("the paraboloid and its cut regions are carried to each other") {
        Rng rng(15);
        for (int i = 0; i < 2000; ++i) {
            const int n = 2 + i % 2;
            const ParaboloidMap t(n, rng.uniform(0.3, 2.0), rng.uniform(-1.5, 1.5));
            Vec u(n);
            for (int k = 0; k < n; ++k) u[k] = rng.uniform(-2.0, 2.0);
            CHECK(inside(u) == inside(t.apply(u)));

            // x in P_h(y) iff x M in P_{h M^{-T}}(y T).
            Vec y(n), h(n), x(n);
            for (int k = 0; k < n; ++k) y[k] = rng.uniform(-0.5, 0.5), h[k] = rng.uniform(-1.0, 1.0), x[k] = rng.uniform(-2, 2);
            h[0] = rng.uniform(0.2, 1.0);
            XiQuery q{y, y, h, 1.0};
            const XiQuery image = transform_query(q, t);
            const Vec xm = (x.transpose() * t.linear()).transpose();
            const bool before = CutParaboloid(q.y, q.h).contains({x.data(), static_cast<std::size_t>(n)});
            const bool after = CutParaboloid(image.y, image.h).contains({xm.data(), static_cast<std::size_t>(n)});
            CHECK(before == after);
            CHECK(image.v == doctest::Approx(t.determinant()));
        }
    }
}

TEST_CASE("normalising a pair of points") {
    const NormalizedPair trivial = normalize_pair(vec({0.0, 0.0}), vec({0.0, 0.0}));
    CHECK(trivial.a == doctest::Approx(1.0));
    CHECK(trivial.b == doctest::Approx(0.0));
    Rng rng(16);
    for (int i = 0; i < 100; ++i) {
        Vec y(2), y2(2);
        do {
            y << rng.uniform(-1.0, 3.0), rng.uniform(-2.0, 2.0);
            y2 << rng.uniform(-1.0, 3.0), rng.uniform(-2.0, 2.0);
        } while (!inside(y) || !inside(y2));
        const NormalizedPair np = normalize_pair(y, y2);
        CHECK(np.a > 0.0);
        CHECK((np.map.apply(Vec::Zero(2)) - y).norm() < 1e-12);
        const Vec start = vec({np.a * np.a + np.b * np.b - 1.0, np.b});
        CHECK((np.map.apply(start) - y2).norm() < 1e-12);
    }
    CHECK_THROWS_AS(normalize_pair(vec({-2.0, 0.0}), vec({0.0, 0.0})), DomainError);
}

TEST_CASE("Monte Carlo avoidance probabilities") {
    const HeckeSampler sampler(2, 10007);
    SUBCASE("vanishes at tiny covolume") {
        const Estimate e = xi_estimate(XiQuery::single(2, 0.0, 0.01), sampler, 2000, 1);
        CHECK(e.value == 0.0);
    }
    SUBCASE("Siegel bound at large covolume") {
        const Estimate e = xi_estimate(XiQuery::single(2, 0.0, 100.0), sampler, 4000, 2);
        CHECK(e.value >= 1.0 - (4.0 / 3.0) / 100.0 - 3.0 * e.stderr_ - 1e-12);
        CHECK(e.value <= 1.0);
        CHECK(e.stderr_ == doctest::Approx(std::sqrt(e.value * (1 - e.value) / 4000.0)));
    }
    SUBCASE("a pair with equal points is the single query") {
        const XiQuery single = XiQuery::single(2, 0.7, 2.0);
        XiQuery pair = single;
        pair.y2 = pair.y;
        CHECK(xi_estimate(single, sampler, 3000, 3).value == xi_estimate(pair, sampler, 3000, 3).value);
    }
    SUBCASE("monotone in the covolume and inside the sandwich") {
        double prev = 0.0, prev_err = 0.0;
        for (double v : {0.5, 1.0, 2.0, 4.0, 8.0}) {
            const XiQuery q = XiQuery::single(2, 0.5, v);
            const Estimate e = xi_estimate(q, sampler, 3000, 40 + static_cast<std::uint64_t>(v * 10));
            CHECK(prev <= e.value + 3.0 * (prev_err + e.stderr_));
            const Estimate vol = siegel_mean(CutParaboloid(q.y, q.h), 4000, 7);
            CHECK(e.value >= 1.0 - (vol.value + 3.0 * vol.stderr_) / v - 3.0 * e.stderr_);
            prev = e.value;
            prev_err = e.stderr_;
        }
    }
    SUBCASE("maps leave the probability unchanged") {
        Rng rng(17);
        for (int i = 0; i < 10; ++i) {
            const XiQuery q = XiQuery::normalized(rng.uniform(0.6, 1.4), rng.uniform(-0.5, 0.5),
                                                  vec({1.0, rng.uniform(-1.0, 1.0)}), rng.uniform(1.0, 4.0));
            const ParaboloidMap t(2, rng.uniform(0.5, 1.6), rng.uniform(-1.0, 1.0));
            const Estimate a = xi_estimate(q, sampler, 3000, 100 + 2 * static_cast<std::uint64_t>(i));
            const Estimate b = xi_estimate(transform_query(q, t), sampler, 3000, 101 + 2 * static_cast<std::uint64_t>(i));
            CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.stderr_, b.stderr_) + 1e-12);
        }
    }
    SUBCASE("swap symmetry of the normalised pair") {
        Rng rng(18);
        for (int i = 0; i < 5; ++i) {
            const double a = rng.uniform(0.6, 1.5), b = rng.uniform(-0.5, 0.5), v = rng.uniform(1.0, 4.0);
            const Vec h = vec({1.0, rng.uniform(-1.0, 1.0)});
            const Estimate x = xi_estimate(XiQuery::normalized(a, b, h, v), sampler, 3000, 200 + 2 * static_cast<std::uint64_t>(i));
            const Estimate y = xi_estimate(swap_normalized(a, b, h, v), sampler, 3000, 201 + 2 * static_cast<std::uint64_t>(i));
            CHECK(std::abs(x.value - y.value) <= 3.0 * std::hypot(x.stderr_, y.stderr_) + 1e-12);
        }
    }
}

TEST_CASE("Monte Carlo region volumes") {
    const CutParaboloid base(vec({0.0, 0.0}), vec({1.0, 0.0}));
    const Estimate area = siegel_mean(base, 20000, 3);
    CHECK(std::abs(area.value - 4.0 / 3.0) <= 4.0 * area.stderr_);
    // y = (3, 0): the region x2^2 - 4 < x1 < 0 is the base one scaled by 2 in x2 and 4 in x1.
    const CutParaboloid wide(vec({3.0, 0.0}), vec({1.0, 0.0}));
    CHECK(wide.area_2d() == doctest::Approx(8.0 * base.area_2d()));
    const Estimate big = siegel_mean(wide, 20000, 4);
    CHECK(std::abs(big.value - wide.area_2d()) <= 4.0 * big.stderr_);
    const CutParaboloid empty(vec({-1.5, 0.0}), vec({1.0, 0.0}));
    CHECK(siegel_mean(empty, 2000, 5).value == 0.0);
}

TEST_CASE("truncated normalisation integral") {
    const Estimate e = paraboloid_normalisation(HeckeSampler(2, 10007), 20.0, 20000, 6);
    CHECK(e.value >= 0.85);
    CHECK(e.value <= 1.05);
}

TEST_CASE("probability table") {
    XiGrid g;
    g.sigma_max = 4.0;
    g.n_sigma = 5;
    g.v_min = 0.05;
    g.v_max = 20.0;
    g.n_v = 7;
    const HeckeSampler sampler(2, 101);
    const XiCache table = XiCache::build(g, sampler, 300, 5);

    SUBCASE("nodes reproduce the cells and each cell has its own seed") {
        for (int i = 0; i < g.n_sigma; ++i)
            for (int j = 0; j < g.n_v; ++j) {
                CHECK(table(table.sigma_node(i), table.v_node(j)) == doctest::Approx(table.cell(i, j).value));
                if (table.cell(i, j).n > 0) {
                    const Estimate direct =
                        xi_estimate(XiQuery::single(2, table.sigma_node(i), table.v_node(j)), sampler, 300, table.cell_seed(i, j));
                    CHECK(direct.value == table.cell(i, j).value);
                }
            }
    }
    SUBCASE("rows never increase towards small covolume") {
        for (int i = 0; i < g.n_sigma; ++i)
            for (int j = 1; j < g.n_v; ++j)
                if (table.cell(i, j).value == 0.0) CHECK(table.cell(i, j - 1).value == 0.0);
    }
    SUBCASE("outside the grid") {
        CHECK_THROWS_AS(static_cast<void>(table(5.0, 1.0)), CoverageError);
        CHECK_THROWS_AS(static_cast<void>(table(1.0, 50.0)), CoverageError);
    }
    SUBCASE("CSV round trip") {
        std::ostringstream text;
        table.save_csv(text);
        CHECK(text.str().find("sigma,v,estimate,stderr,n,seed") != std::string::npos);
        const auto path = std::filesystem::temp_directory_path() / "lorentz_xi_table_test.csv";
        table.save_csv(path);
        const XiCache back = XiCache::load_csv(path);
        std::filesystem::remove(path);
        CHECK(back.master_seed() == table.master_seed());
        CHECK(back.prime() == table.prime());
        for (int i = 0; i < g.n_sigma; ++i)
            for (int j = 0; j < g.n_v; ++j) {
                CHECK(back.cell(i, j).value == table.cell(i, j).value);
                CHECK(back.cell(i, j).stderr_ == table.cell(i, j).stderr_);
                CHECK(back.cell(i, j).n == table.cell(i, j).n);
            }
    }
    SUBCASE("independent of the worker count") {
        const testing::ThreadCap cap(1);
        const XiCache serial = XiCache::build(g, sampler, 300, 5);
        for (int i = 0; i < g.n_sigma; ++i)
            for (int j = 0; j < g.n_v; ++j) CHECK(serial.cell(i, j).value == table.cell(i, j).value);
    }
}

TEST_CASE("large-xi profile in three dimensions") {
    const XiCache& table = small_table();
    const double t_star = std::pow(2.0 / std::sqrt(3.0), 2.0 / 3.0);
    const double edge = f_d_support(table);
    CHECK(edge <= t_star * 1.02);
    CHECK(edge >= t_star * 0.9);
    for (double t : {1.0 * t_star, 1.2 * t_star, 1.5, 2.5}) {
        CHECK(f_d_quad(t, table) == 0.0);
        CHECK(g_d_quad(t, table) == 0.0);
    }
    double prev_f = 1e300;
    for (int i = 1; i <= 20; ++i) {
        const double t = 0.05 * i;
        const double f = f_d_quad(t, table);
        const double g = g_d_quad(t, table);
        CHECK(f > 0.0);
        CHECK(g >= 0.0);
        CHECK(f <= prev_f * (1.0 + 0.05));
        prev_f = f;
    }
    // G = (2 - 2/d) F - (2/d) t F' with the derivative by central differences.
    for (double t : {0.3, 0.5, 0.7}) {
        const double h = 0.02;
        const double fp = (f_d_quad(t + h, table) - f_d_quad(t - h, table)) / (2 * h);
        const double rel = (4.0 / 3.0) * f_d_quad(t, table) - (2.0 / 3.0) * t * fp;
        CHECK(g_d_quad(t, table) == doctest::Approx(rel).epsilon(0.05));
    }
    // Towards t -> 0 (as far as the table reaches) the secant slope stays
    // bounded, so the profile settles at a positive value.
    const double s_near = (f_d_quad(0.025, table) - f_d_quad(0.03, table)) / 0.005;
    const double s_far = (f_d_quad(0.03, table) - f_d_quad(0.06, table)) / 0.03;
    CHECK(f_d_quad(0.025, table) > 0.0);
    CHECK(std::abs(s_near) <= 1.5 * std::abs(s_far));
    CHECK(f_d_integral(table) == doctest::Approx(1.0 / (96.0 * kZeta3)).epsilon(0.15));
}

TEST_CASE("two-parameter profile") {
    const HeckeSampler sampler(2, 10007);
    const Estimate a = f0d_quad(0.3, 0.6, 0.0, sampler, 40000, 1);
    const Estimate b = f0d_quad(0.6, 0.3, 0.0, sampler, 40000, 2);
    CHECK(a.value > 0.0);
    CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.stderr_, b.stderr_));
    CHECK(f0d_quad(2.5, 0.3, 0.0, sampler, 2000, 3).value == 0.0);
    CHECK(f0d_quad(0.3, 2.5, 0.0, sampler, 2000, 4).value == 0.0);
}
