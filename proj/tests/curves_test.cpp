#include "doctest.h"

#include <sstream>

#include "lorentz/csv.hpp"
#include "lorentz/curves.hpp"
#include "lorentz/error.hpp"
#include "support.hpp"

using namespace lorentz;
using testing::kPi;
using testing::kZeta3;

namespace {

McConfig small_full() {
    McConfig cfg;
    cfg.p = 31;
    cfg.m = 2;
    cfg.seed = 7;
    return cfg;
}

McConfig small_random() {
    McConfig cfg;
    cfg.p = 10007;
    cfg.mode = SampleMode::random;
    cfg.samples = 4000;
    cfg.seed = 3;
    return cfg;
}

std::string meta(const CurveEstimate& c, const std::string& key) {
    for (const auto& [k, v] : c.meta)
        if (k == key) return v;
    return {};
}

void check_normalised(const CurveEstimate& c, double delta) {
    double mass = c.tail_mass;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        CHECK(c.values[i] >= 0.0);
        CHECK(c.bin_edges[i + 1] - c.bin_edges[i] == doctest::Approx(delta));
        mass += c.values[i] * delta;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

}  // namespace

TEST_CASE("generic-start curve") {
    const McConfig cfg = small_full();
    const CurveEstimate c = mc_phi_curve(cfg, 0.02, 2.0);
    CHECK(c.values.size() == 100);
    CHECK(c.bin_edges.size() == 101);
    CHECK(c.n_samples == (1 + 31 + 31 * 31) * 8);
    check_normalised(c, 0.02);
    CHECK(meta(c, "p") == "31");
    CHECK(meta(c, "m") == "2");
    CHECK(meta(c, "mode") == "full");
    CHECK(c.seed == 7);
    // The first bins sit near the exact density pi - pi^2/zeta(3) xi.
    CHECK(std::abs(c.values[0] - (kPi - kPi * kPi / kZeta3 * 0.01)) <= 4.0 * c.stderr_[0]);

    SUBCASE("same result with one worker") {
        const testing::ThreadCap cap(1);
        CHECK(mc_phi_curve(cfg, 0.02, 2.0) == c);
    }
    SUBCASE("CSV round trip") {
        const auto path = std::filesystem::temp_directory_path() / "lorentz_curve_test.csv";
        write_curve_csv(path, c);
        const CurveEstimate back = read_curve_csv(path);
        std::filesystem::remove(path);
        CHECK(back == c);
    }
    SUBCASE("the header lines are enough to rerun it") {
        std::ostringstream out;
        write_curve_csv(out, c);
        const std::string text = out.str();
        CHECK(text.find("xi_mid,value,stderr,n") != std::string::npos);
        McConfig again;
        again.p = std::stoull(meta(c, "p"));
        again.m = std::stoi(meta(c, "m"));
        again.mode = meta(c, "mode") == "full" ? SampleMode::full : SampleMode::random;
        again.samples = std::stoull(meta(c, "samples"));
        again.rotation = parse_rotation(meta(c, "rotation"));
        again.seed = c.seed;
        const auto x0 = split(meta(c, "x0"), ';');
        for (int i = 0; i < 3; ++i) again.x0[i] = parse_double(x0[static_cast<std::size_t>(i)]);
        CHECK(mc_phi_curve(again, parse_double(meta(c, "delta")), 2.0) == c);
    }
}

TEST_CASE("random mode and seeds") {
    McConfig cfg = small_random();
    const CurveEstimate a = mc_phi_curve(cfg, 0.05, 2.0);
    CHECK(a.n_samples == 4000);
    check_normalised(a, 0.05);
    CHECK(mc_phi_curve(cfg, 0.05, 2.0) == a);
    cfg.seed = 4;
    CHECK_FALSE(mc_phi_curve(cfg, 0.05, 2.0) == a);
}

TEST_CASE("histogram of free paths equals per-bin disjointness tests") {
    const HeckeSampler sampler(3, 10007);
    const double delta = 0.1;
    const int bins = 20;
    Rng rng(5);
    for (int s = 0; s < 1000; ++s) {
        const LatticeBasis m = sampler.sample(rng);
        Vec x(3);
        for (int i = 0; i < 3; ++i) x[i] = rng.uniform();
        const LatticeBasis lattice = m.with_shift((x.transpose() * m.basis()).transpose());
        const Vec axis = Vec::Zero(2);
        const auto alpha = free_path_alpha(lattice, axis, 1.0, bins * delta);
        for (int b = 0; b < bins; ++b) {
            const double lo = b * delta;
            const double hi = (b + 1) * delta;
            const bool event = (lo == 0.0 || is_disjoint(lattice, Cylinder(0.0, lo, 1.0, axis))) &&
                               !is_disjoint(lattice, Cylinder(0.0, hi, 1.0, axis));
            const bool in_bin = alpha && *alpha >= lo && *alpha < hi;
            CHECK(event == in_bin);
        }
    }
}

TEST_CASE("scatterer-start curve") {
    McConfig cfg = small_random();
    const CurveEstimate c = mc_phi0_curve(cfg, 0.02, 1.2);
    check_normalised(c, 0.02);
    CHECK(c.max_value <= 2.0 / std::sqrt(3.0) + 1e-9);
    CHECK(c.tail_mass == 0.0);

    SUBCASE("several directions and per-sample rotations") {
        cfg.rotation = RotationParams::per_sample();
        cfg.directions = 8;
        const CurveEstimate d = mc_phi0_curve(cfg, 0.02, 1.2);
        CHECK(d.n_samples == 8 * 4000);
        CHECK(meta(d, "directions") == "8");
        CHECK(meta(d, "rotation") == "per-sample");
        check_normalised(d, 0.02);
        CHECK(d.max_value <= 2.0 / std::sqrt(3.0) + 1e-9);
        const testing::ThreadCap cap(1);
        CHECK(mc_phi0_curve(cfg, 0.02, 1.2) == d);
    }
    SUBCASE("estimates decrease across bins up to noise") {
        cfg.samples = 20000;
        cfg.rotation = RotationParams::per_sample();
        const CurveEstimate d = mc_phi0_curve(cfg, 0.1, 1.2);
        for (std::size_t i = 1; i < d.values.size(); ++i)
            CHECK(d.values[i] <= d.values[i - 1] + 3.0 * std::hypot(d.stderr_[i], d.stderr_[i - 1]));
    }
}

TEST_CASE("hemisphere frames") {
    CHECK(hemisphere_frames(1).front() == Mat::Identity(3, 3));
    const auto frames = hemisphere_frames(16);
    REQUIRE(frames.size() == 16);
    Vec mean = Vec::Zero(3);
    for (const Mat& f : frames) {
        CHECK((f * f.transpose() - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(f(0, 2) > 0.0);
        mean += f.row(0).transpose() / 16.0;
    }
    // Fibonacci points balance out in the plane of the equator.
    CHECK(std::hypot(mean[0], mean[1]) < 0.1);
    CHECK(mean[2] == doctest::Approx(0.5).epsilon(0.01));
    CHECK_THROWS_AS(hemisphere_frames(0), DomainError);
}

TEST_CASE("collision kernel estimator") {
    McConfig cfg;
    cfg.p = 10007;
    cfg.samples = 20000;
    auto closed = [](double xi, const Vec2& w, const Vec2& z) {
        const double t = (w - z).norm() / 2.0;
        return (1.0 - 6.0 / (kPi * kPi) * (kPi - std::acos(t) + t * std::sqrt(1 - t * t)) * xi) / kZeta3;
    };
    SUBCASE("matches the small-xi closed form") {
        const Vec2 w(0.3, 0.0), z(-0.2, 0.1);
        cfg.seed = 1;
        const Estimate e = mc_phi0_kernel(0.2, w, z, cfg);
        CHECK(std::abs(e.value - closed(0.2, w, z)) <= 3.0 * e.stderr_);
        CHECK(std::abs(e.value - phi0_3d_smallxi(0.2, w, z)) <= 3.0 * e.stderr_);
    }
    SUBCASE("parameters near the rim with w = z") {
        // The exit point sits on the closed end of the cylinder here.
        const Vec2 w(0.9, 0.0);
        cfg.seed = 2;
        const Estimate e = mc_phi0_kernel(0.1, w, w, cfg);
        CHECK(std::abs(e.value - closed(0.1, w, w)) <= 3.0 * e.stderr_);
    }
    SUBCASE("tends to 1/zeta(3) as xi -> 0") {
        cfg.seed = 3;
        const Estimate e = mc_phi0_kernel(1e-4, Vec2(0.5, 0.1), Vec2(-0.3, 0.4), cfg);
        CHECK(std::abs(e.value - 1.0 / kZeta3) <= 3.0 * e.stderr_ + 1e-3);
    }
    SUBCASE("symmetric in the exit and entry parameters") {
        const Vec2 w(0.7, -0.2), z(-0.1, 0.5);
        cfg.seed = 4;
        const Estimate a = mc_phi0_kernel(0.6, w, z, cfg);
        cfg.seed = 5;
        const Estimate b = mc_phi0_kernel(0.6, z, w, cfg);
        CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.stderr_, b.stderr_));
        const KernelBounds kb = kernel_bounds(3, 0.6);
        CHECK(a.value >= kb.lower - 3.0 * a.stderr_);
        CHECK(a.value <= kb.upper + 3.0 * a.stderr_);
    }
    CHECK_THROWS_AS(mc_phi0_kernel(0.2, Vec2(1.0, 0.0), Vec2(0, 0), cfg), DomainError);
}

TEST_CASE("survival from a histogram") {
    CurveEstimate c;
    c.bin_edges = {0.0, 0.5, 1.0};
    c.values = {1.2, 0.4};
    c.tail_mass = 0.2;
    const auto s = curve_survival(c);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(0.4));
    CHECK(s[2] == doctest::Approx(0.2));
}

TEST_CASE("rotation names") {
    for (const RotationParams& r : {RotationParams::fixed(), RotationParams::identity(), RotationParams::per_sample(),
                                    RotationParams::random(42)}) {
        const RotationParams back = parse_rotation(to_string(r));
        CHECK(back.kind == r.kind);
        CHECK(back.seed == r.seed);
    }
    CHECK_THROWS_AS(parse_rotation("sideways"), DomainError);
}

TEST_CASE("invalid configurations") {
    McConfig cfg = small_full();
    cfg.p = 30;
    CHECK_THROWS_AS(mc_phi_curve(cfg, 0.02, 2.0), DomainError);
    cfg = small_full();
    cfg.m = 0;
    CHECK_THROWS_AS(mc_phi_curve(cfg, 0.02, 2.0), DomainError);
    cfg = small_random();
    cfg.samples = 0;
    CHECK_THROWS_AS(mc_phi0_curve(cfg, 0.02, 1.2), DomainError);
    CHECK_THROWS_AS(mc_phi_curve(small_full(), -0.1, 2.0), DomainError);
}
