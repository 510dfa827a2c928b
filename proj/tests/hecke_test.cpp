#include "doctest.h"

#include <numeric>
#include <set>

#include "lorentz/error.hpp"
#include "lorentz/hecke.hpp"
#include "support.hpp"

using namespace lorentz;

namespace {

long long to_int(double x) { return std::llround(x); }

long long gcd_all(const std::vector<long long>& xs) {
    long long g = 0;
    for (long long x : xs) g = std::gcd(g, x < 0 ? -x : x);
    return g;
}

// Determinantal divisors give the Smith form: d_1 = gcd of entries,
// d_1 d_2 = gcd of 2x2 minors, ..., d_1...d_n = |det|.
std::vector<long long> smith_diagonal(const Mat& t) {
    const int n = static_cast<int>(t.rows());
    std::vector<long long> divisors;
    std::vector<long long> entries;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) entries.push_back(to_int(t(i, j)));
    divisors.push_back(gcd_all(entries));
    if (n == 3) {
        std::vector<long long> minors;
        for (int r0 = 0; r0 < 3; ++r0)
            for (int r1 = r0 + 1; r1 < 3; ++r1)
                for (int c0 = 0; c0 < 3; ++c0)
                    for (int c1 = c0 + 1; c1 < 3; ++c1)
                        minors.push_back(to_int(t(r0, c0)) * to_int(t(r1, c1)) - to_int(t(r0, c1)) * to_int(t(r1, c0)));
        divisors.push_back(gcd_all(minors));
    }
    divisors.push_back(std::llabs(to_int(t.determinant())));
    std::vector<long long> diag;
    long long prev = 1;
    for (long long dk : divisors) {
        diag.push_back(dk / prev);
        prev = dk;
    }
    return diag;
}

Mat rz(double a) {
    Mat m(3, 3);
    m << std::cos(a), std::sin(a), 0, -std::sin(a), std::cos(a), 0, 0, 0, 1;
    return m;
}

Mat rx(double a) {
    Mat m(3, 3);
    m << 1, 0, 0, 0, std::cos(a), std::sin(a), 0, -std::sin(a), std::cos(a);
    return m;
}

bool same_lattice(const Mat& a, const Mat& b) {
    const Mat u = a * b.inverse();
    return (u.array() - u.array().round()).abs().maxCoeff() < 1e-8 && std::abs(std::abs(u.determinant()) - 1.0) < 1e-8;
}

}  // namespace

TEST_CASE("primality") {
    CHECK_FALSE(is_prime(0));
    CHECK_FALSE(is_prime(1));
    CHECK(is_prime(2));
    CHECK(is_prime(1511));
    CHECK(is_prime(10007));
    CHECK(is_prime(1000000007ULL));
    CHECK_FALSE(is_prime(8));
    CHECK_FALSE(is_prime(10007ULL * 10009ULL));
}

TEST_CASE("Hecke set sizes") {
    CHECK(hecke_enumerate(3, 2).size() == 7);
    CHECK(hecke_enumerate(2, 3).size() == 4);
    CHECK(HeckeSet(3, 1511).size() == 1ULL + 1511 + 1511ULL * 1511);
    CHECK_THROWS_AS(HeckeSet(3, 8), DomainError);
    CHECK_THROWS_AS(HeckeSet(4, 5), DomainError);
}

TEST_CASE("every representative has Smith form diag(1, ..., 1, p)") {
    for (std::uint64_t p = 2; p <= 101; ++p) {
        if (!is_prime(p)) continue;
        for (int d : {2, 3}) {
            const HeckeSet set(d, p);
            for (std::uint64_t i = 0; i < set.size(); ++i) {
                const Mat t = set.element(i);
                REQUIRE((t.array() - t.array().round()).abs().maxCoeff() == 0.0);
                const auto diag = smith_diagonal(t);
                std::vector<long long> expected(static_cast<std::size_t>(d), 1);
                expected.back() = static_cast<long long>(p);
                if (diag != expected) {
                    FAIL("p = " << p << " index " << i);
                }
            }
        }
    }
}

TEST_CASE("representatives give pairwise different sublattices") {
    for (int d : {2, 3}) {
        const auto all = hecke_enumerate(d, 5);
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j) CHECK_FALSE(same_lattice(all[i], all[j]));
    }
}

TEST_CASE("rotations are special orthogonal") {
    const Mat fixed = RotationParams::fixed().matrix(3);
    CHECK((fixed - rz(0.5) * rx(1.0) * rz(1.5)).cwiseAbs().maxCoeff() < 1e-15);
    Rng rng(3);
    std::vector<Mat> ks{fixed, RotationParams::fixed().matrix(2), RotationParams::random(4).matrix(3),
                        RotationParams::identity().matrix(3)};
    for (int d = 2; d <= 4; ++d) ks.push_back(random_rotation(d, rng));
    for (const Mat& k : ks) {
        const auto d = k.rows();
        CHECK((k * k.transpose() - Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(k.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(RotationParams::per_sample().matrix(3) == Mat::Identity(3, 3));
    CHECK(RotationParams::random(4).matrix(3) == RotationParams::random(4).matrix(3));
}

TEST_CASE("Haar rotations spread the first row evenly") {
    Rng rng(12);
    const int n = 20000;
    double mean_z = 0.0;
    double mean_z2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = random_rotation(3, rng)(0, 2);
        mean_z += z / n;
        mean_z2 += z * z / n;
    }
    // A uniform unit vector has E z = 0 and E z^2 = 1/3.
    CHECK(std::abs(mean_z) < 4.0 * std::sqrt(1.0 / 3.0 / n));
    CHECK(std::abs(mean_z2 - 1.0 / 3.0) < 4.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST_CASE("Hecke lattices") {
    SUBCASE("unimodular at p = 1511") {
        const HeckeSet set(3, 1511);
        const Mat k = RotationParams::fixed().matrix(3);
        for (std::uint64_t i : {0ULL, 1ULL, 700ULL, 1512ULL, 2000000ULL}) {
            const LatticeBasis l = hecke_lattice(set, i, k);
            CHECK(std::abs(l.basis().determinant()) == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(l.covolume() == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(same_lattice(l.reduced(), l.basis()));
        }
    }
    SUBCASE("planar element") {
        Mat t(2, 2);
        t << 1, 1, 0, 2;
        const LatticeBasis l = hecke_lattice(t, 2, Mat::Identity(2, 2));
        CHECK((l.basis() - t / std::sqrt(2.0)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(std::abs(l.basis().determinant()) == doctest::Approx(1.0));
    }
    SUBCASE("composite p is rejected") {
        CHECK_THROWS_AS(hecke_lattice(Mat(Mat::Identity(3, 3) * 2.0), 8, Mat::Identity(3, 3)), DomainError);
    }
}

TEST_CASE("sampler draws unimodular reduced lattices") {
    const HeckeSampler sampler(3, 10007);
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        const LatticeBasis l = sampler.sample(rng);
        CHECK(l.covolume() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(same_lattice(l.reduced(), l.basis()));
    }
}

TEST_CASE("torus grids") {
    const auto one = torus_points(3, 1, Vec::Zero(3));
    REQUIRE(one.size() == 1);
    CHECK(one[0].norm() == 0.0);
    CHECK(torus_points(3, 2, Vec::Zero(3)).size() == 8);

    Vec x0(3);
    x0 << std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0);
    const auto grid = torus_points(3, 20, x0);
    REQUIRE(grid.size() == 8000);
    std::set<std::array<long long, 3>> cells;
    for (const Vec& x : grid) {
        CHECK(x.minCoeff() >= 0.0);
        CHECK(x.maxCoeff() < 1.0);
        // Each point sits in its own 1/20 cell.
        cells.insert({static_cast<long long>(x[0] * 20), static_cast<long long>(x[1] * 20),
                      static_cast<long long>(x[2] * 20)});
    }
    CHECK(cells.size() == 8000);
    CHECK_THROWS_AS(torus_points(3, 0, Vec::Zero(3)), DomainError);
}

TEST_CASE("frames built from a unit vector") {
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        Vec v(3);
        for (int k = 0; k < 3; ++k) v[k] = rng.normal();
        v.normalize();
        if (i == 0) v << 1, 0, 0;
        if (i == 1) v << -1, 0, 0;
        const Mat f = frame_from(v);
        CHECK((f * f.transpose() - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((f.row(0).transpose() - v).norm() < 1e-12);
    }
}
