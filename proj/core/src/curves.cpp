#include "lorentz/curves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <atomic>
#include <mutex>
#include <numbers>

#include "lorentz/csv.hpp"
#include "lorentz/error.hpp"
#include "lorentz/parallel.hpp"
#include "lorentz/special.hpp"

namespace lorentz {
namespace {

struct Histogram {
    std::vector<std::uint64_t> counts;
    // Sum over lattices of the squared per-lattice bin count; only filled when
    // several correlated directions share a lattice.
    std::vector<std::uint64_t> group_squares;
    std::uint64_t groups = 0;
    std::uint64_t tail = 0;
    std::uint64_t total = 0;
    double max_alpha = 0.0;

    explicit Histogram(std::size_t bins) : counts(bins, 0), group_squares(bins, 0) {}

    void add(const std::optional<double>& alpha, double delta) {
        ++total;
        if (!alpha) {
            ++tail;
            return;
        }
        max_alpha = std::max(max_alpha, *alpha);
        const auto bin = static_cast<std::size_t>(*alpha / delta);
        if (bin < counts.size()) {
            ++counts[bin];
        } else {
            ++tail;
        }
    }

    void merge(const Histogram& other) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            counts[i] += other.counts[i];
            group_squares[i] += other.group_squares[i];
        }
        groups += other.groups;
        tail += other.tail;
        total += other.total;
        max_alpha = std::max(max_alpha, other.max_alpha);
    }
};

std::size_t bin_count(double delta, double xi_max) {
    if (!(delta > 0.0)) throw DomainError("--delta must be positive");
    if (!(xi_max > 0.0)) throw DomainError("--xi-max must be positive");
    const double n = std::round(xi_max / delta);
    if (std::abs(n * delta - xi_max) > 1e-9 * xi_max) throw DomainError("--xi-max must be a multiple of --delta");
    if (n > 1e7) throw DomainError("too many bins");
    return static_cast<std::size_t>(n);
}

void check_config(const McConfig& cfg) {
    if (!is_prime(cfg.p)) throw DomainError("--p must be prime, got " + std::to_string(cfg.p));
    if (cfg.mode == SampleMode::full && cfg.m < 1) throw DomainError("--m must be at least 1");
    if (cfg.mode == SampleMode::random && cfg.samples == 0) throw DomainError("random mode needs --samples >= 1");
    if (cfg.x0.size() != 3) throw DomainError("torus offset must be three-dimensional");
    if (cfg.directions < 1 || cfg.directions > 4096) throw DomainError("--directions must lie in [1, 4096]");
}

CurveEstimate finish(const Histogram& h, double delta, const McConfig& cfg, const std::string& kind) {
    CurveEstimate c;
    const std::size_t bins = h.counts.size();
    const auto n = static_cast<double>(h.total);
    for (std::size_t i = 0; i <= bins; ++i) c.bin_edges.push_back(static_cast<double>(i) * delta);
    for (std::size_t i = 0; i < bins; ++i) {
        c.xi.push_back((static_cast<double>(i) + 0.5) * delta);
        const double f = static_cast<double>(h.counts[i]) / n;
        c.values.push_back(f / delta);
        if (h.groups > 0) {
            // Between-lattice variance of the per-lattice bin fraction.
            const auto g = static_cast<double>(h.groups);
            const double per = n / g;
            const double mean = static_cast<double>(h.counts[i]) / g;
            const double var = std::max(0.0, static_cast<double>(h.group_squares[i]) / g - mean * mean);
            c.stderr_.push_back(std::sqrt(var / std::max(1.0, g - 1.0)) / per / delta);
        } else {
            c.stderr_.push_back(std::sqrt(f * (1.0 - f) / n) / delta);
        }
    }
    c.counts = h.counts;
    c.n_samples = h.total;
    c.seed = cfg.seed;
    c.tail_mass = static_cast<double>(h.tail) / n;
    c.max_value = h.max_alpha;
    c.meta = {{"kind", kind},
              {"p", std::to_string(cfg.p)},
              {"m", std::to_string(cfg.m)},
              {"mode", to_string(cfg.mode)},
              {"samples", std::to_string(cfg.samples)},
              {"rotation", to_string(cfg.rotation)},
              {"x0", format_double(cfg.x0[0]) + ";" + format_double(cfg.x0[1]) + ";" + format_double(cfg.x0[2])},
              {"delta", format_double(delta)}};
    if (cfg.directions != 1) c.meta.emplace_back("directions", std::to_string(cfg.directions));
    return c;
}

/// Shift reduced into the fundamental cell of the lattice's reduced basis.
Vec reduce_shift(const LatticeBasis& lattice, const Vec& shift) {
    const Vec coeffs = (shift.transpose() * lattice.reduced_inverse()).transpose();
    const Vec whole = coeffs.array().round();
    return shift - (whole.transpose() * lattice.reduced()).transpose();
}

template <class Sample>
Histogram run(std::size_t count, std::size_t bins, Sample sample) {
    Histogram total(bins);
    std::mutex mutex;
    parallel_ranges(count, [&](std::size_t begin, std::size_t end) {
        Histogram local(bins);
        for (std::size_t i = begin; i < end; ++i) sample(i, local);
        std::lock_guard lock(mutex);
        total.merge(local);
    });
    return total;
}

}  // namespace

Vec McConfig::default_offset() {
    Vec x(3);
    x << std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0);
    return x;
}

std::string to_string(const RotationParams& rotation) {
    switch (rotation.kind) {
        case RotationParams::Kind::fixed: return "fixed";
        case RotationParams::Kind::identity: return "identity";
        case RotationParams::Kind::random: return "random:" + std::to_string(rotation.seed);
        case RotationParams::Kind::per_sample: return "per-sample";
    }
    return "fixed";
}

RotationParams parse_rotation(const std::string& text) {
    if (text == "fixed") return RotationParams::fixed();
    if (text == "identity") return RotationParams::identity();
    if (text == "per-sample") return RotationParams::per_sample();
    if (text.starts_with("random:")) return RotationParams::random(std::stoull(text.substr(7)));
    throw DomainError("rotation must be fixed, identity, per-sample or random:<seed>");
}

std::string to_string(SampleMode mode) { return mode == SampleMode::full ? "full" : "random"; }

CurveEstimate mc_phi_curve(const McConfig& cfg, double delta, double xi_max) {
    check_config(cfg);
    const std::size_t bins = bin_count(delta, xi_max);
    const HeckeSet set(3, cfg.p);
    const Mat k = cfg.rotation.matrix(3);
    const Vec center = Vec::Zero(2);
    const bool per_sample = cfg.rotation.kind == RotationParams::Kind::per_sample;
    Histogram h(bins);
    if (cfg.mode == SampleMode::full) {
        const std::vector<Vec> shifts = torus_points(3, cfg.m, cfg.x0);
        h = run(static_cast<std::size_t>(set.size()), bins, [&](std::size_t i, Histogram& out) {
            Mat ki = k;
            if (per_sample) {
                Rng rng(cfg.seed, i);
                ki = random_rotation(3, rng);
            }
            const LatticeBasis lattice = hecke_lattice(set, i, ki);
            for (const Vec& x : shifts) {
                const Vec s = reduce_shift(lattice, (x.transpose() * lattice.basis()).transpose());
                out.add(free_path_alpha(lattice.with_shift(s), center, 1.0, xi_max), delta);
            }
        });
    } else {
        h = run(static_cast<std::size_t>(cfg.samples), bins, [&](std::size_t i, Histogram& out) {
            Rng rng(cfg.seed, i);
            const std::uint64_t index = rng.below(set.size());
            const LatticeBasis lattice = hecke_lattice(set, index, per_sample ? Mat(random_rotation(3, rng)) : k);
            Vec x(3);
            for (int j = 0; j < 3; ++j) x[j] = rng.uniform();
            const Vec s = reduce_shift(lattice, (x.transpose() * lattice.basis()).transpose());
            out.add(free_path_alpha(lattice.with_shift(s), center, 1.0, xi_max), delta);
        });
    }
    return finish(h, delta, cfg, "phi");
}

std::vector<Mat> hemisphere_frames(int count) {
    if (count < 1) throw DomainError("direction count must be at least 1");
    if (count == 1) return {Mat::Identity(3, 3)};
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(count));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < count; ++j) {
        const double z = 1.0 - (j + 0.5) / count;
        const double r = std::sqrt(1.0 - z * z);
        Vec u(3);
        u << r * std::cos(golden * j), r * std::sin(golden * j), z;
        out.push_back(frame_from(u));
    }
    return out;
}

CurveEstimate mc_phi0_curve(const McConfig& cfg, double delta, double xi_max) {
    check_config(cfg);
    const std::size_t bins = bin_count(delta, xi_max);
    const HeckeSet set(3, cfg.p);
    const Mat k = cfg.rotation.matrix(3);
    // Probing Z^3 M along u is the same as probing Z^3 M F^T along e1.
    const bool per_sample = cfg.rotation.kind == RotationParams::Kind::per_sample;
    const std::vector<Mat> frames = hemisphere_frames(cfg.directions);
    const Vec center = Vec::Zero(2);
    const bool full = cfg.mode == SampleMode::full;
    const auto count = static_cast<std::size_t>(full ? set.size() : cfg.samples);
    const Histogram h = run(count, bins, [&](std::size_t i, Histogram& out) {
        std::uint64_t index = i;
        Rng rng(cfg.seed, i);
        if (!full) index = rng.below(set.size());
        Mat ki = k;
        if (per_sample) ki = random_rotation(3, rng);
        if (frames.size() == 1) {
            out.add(free_path_alpha(hecke_lattice(set, index, ki), center, 1.0, xi_max), delta);
            return;
        }
        Histogram one(bins);
        for (const Mat& f : frames)
            one.add(free_path_alpha(hecke_lattice(set, index, ki * f.transpose()), center, 1.0, xi_max), delta);
        for (std::size_t b = 0; b < bins; ++b) one.group_squares[b] = one.counts[b] * one.counts[b];
        one.groups = 1;
        out.merge(one);
    });
    return finish(h, delta, cfg, "phi0");
}

Estimate mc_phi0_kernel(double xi, const Vec2& w, const Vec2& z, const McConfig& cfg) {
    if (!(xi > 0.0)) throw DomainError("xi must be positive");
    if (!(w.squaredNorm() < 1.0) || !(z.squaredNorm() < 1.0)) throw DomainError("w and z must lie in the unit disc");
    if (cfg.samples == 0) throw DomainError("kernel estimate needs --samples >= 1");
    const HeckeSampler planar(2, cfg.p);
    const double y1 = std::cbrt(xi);
    const Eigen::Vector3d y(y1, y1 * (z[0] + w[0]), y1 * (z[1] + w[1]));
    const double squeeze = 1.0 / std::sqrt(y1);
    Vec c(2);
    c << y1 * z[0], y1 * z[1];
    // The first row y lies on the face x1 = y1 by construction, and rounding
    // in the reduced basis can move it inside; pull the face in to exclude it.
    const Cylinder cylinder(0.0, y1 * (1.0 - 1e-10), y1, c);
    std::atomic<std::uint64_t> hits{0};
    parallel_ranges(static_cast<std::size_t>(cfg.samples), [&](std::size_t begin, std::size_t end) {
        std::uint64_t local = 0;
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(cfg.seed, i);
            const LatticeBasis a = planar.sample(rng);
            const double v1 = rng.uniform();
            const double v2 = rng.uniform();
            Mat b(3, 3);
            b.row(0) = y.transpose();
            for (int r = 0; r < 2; ++r) {
                const double v = r == 0 ? v1 : v2;
                b(r + 1, 0) = v * y[0];
                b(r + 1, 1) = v * y[1] + squeeze * a.reduced()(r, 0);
                b(r + 1, 2) = v * y[2] + squeeze * a.reduced()(r, 1);
            }
            if (is_disjoint(LatticeBasis(b), cylinder)) ++local;
        }
        hits.fetch_add(local);
    });
    const auto n = static_cast<double>(cfg.samples);
    const double p = static_cast<double>(hits.load()) / n;
    const double z3 = zeta(3);
    return {p / z3, std::sqrt(p * (1.0 - p) / n) / z3, cfg.samples};
}

std::vector<double> curve_survival(const CurveEstimate& curve) {
    if (curve.bin_edges.size() != curve.values.size() + 1) throw DomainError("survival needs a histogram curve");
    std::vector<double> out(curve.bin_edges.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        out[i] = 1.0 - mass;
        mass += curve.values[i] * (curve.bin_edges[i + 1] - curve.bin_edges[i]);
    }
    out.back() = 1.0 - mass;
    return out;
}

void write_curve_csv(std::ostream& out, const CurveEstimate& c) {
    for (const auto& [k, v] : c.meta) out << "# " << k << '=' << v << '\n';
    out << "# n_samples=" << c.n_samples << '\n';
    out << "# seed=" << c.seed << '\n';
    out << "# tail_mass=" << format_double(c.tail_mass) << '\n';
    out << "# max_value=" << format_double(c.max_value) << '\n';
    if (!c.bin_edges.empty()) {
        out << "# edges=";
        for (std::size_t i = 0; i < c.bin_edges.size(); ++i) out << (i ? ";" : "") << format_double(c.bin_edges[i]);
        out << '\n';
    }
    out << "xi_mid,value,stderr,n\n";
    for (std::size_t i = 0; i < c.values.size(); ++i)
        out << format_double(c.xi[i]) << ',' << format_double(c.values[i]) << ',' << format_double(c.stderr_[i]) << ','
            << (i < c.counts.size() ? c.counts[i] : 0) << '\n';
}

void write_curve_csv(const std::filesystem::path& path, const CurveEstimate& c) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open " + path.string() + " for writing");
    write_curve_csv(out, c);
    if (!out) throw DomainError("failed writing " + path.string());
}

CurveEstimate read_curve_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header != std::vector<std::string>{"xi_mid", "value", "stderr", "n"})
        throw DomainError(path.string() + " is not a curve file");
    CurveEstimate c;
    for (const auto& [k, v] : t.meta) {
        if (k == "n_samples") {
            c.n_samples = std::stoull(v);
        } else if (k == "seed") {
            c.seed = std::stoull(v);
        } else if (k == "tail_mass") {
            c.tail_mass = parse_double(v);
        } else if (k == "max_value") {
            c.max_value = parse_double(v);
        } else if (k == "edges") {
            for (const auto& e : split(v, ';')) c.bin_edges.push_back(parse_double(e));
        } else {
            c.meta.emplace_back(k, v);
        }
    }
    for (const auto& row : t.rows) {
        c.xi.push_back(parse_double(row[0]));
        c.values.push_back(parse_double(row[1]));
        c.stderr_.push_back(parse_double(row[2]));
        c.counts.push_back(std::stoull(row[3]));
    }
    return c;
}

}  // namespace lorentz
