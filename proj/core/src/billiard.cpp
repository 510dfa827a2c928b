#include "lorentz/billiard.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "lorentz/csv.hpp"
#include "lorentz/error.hpp"
#include "lorentz/hecke.hpp"
#include "lorentz/parallel.hpp"
#include "lorentz/rng.hpp"

namespace lorentz {
namespace {

constexpr double kWindow = 4.0;  // macroscopic length of each search window

Vec random_direction(int d, Rng& rng) {
    Vec v(d);
    double n2 = 0.0;
    while (n2 < 1e-20) {
        for (int j = 0; j < d; ++j) v[j] = rng.normal();
        n2 = v.squaredNorm();
    }
    return v / std::sqrt(n2);
}

double distance_to_lattice(const Vec& q) { return (q.array() - q.array().round()).matrix().norm(); }

void check_rho(double rho) {
    if (!(rho > 0.0 && rho < 0.5)) throw DomainError("--rho must lie in (0, 0.5)");
}

}  // namespace

std::optional<Hit> first_hit(const Vec& q, const Vec& v, double rho, double max_len) {
    const auto d = static_cast<int>(q.size());
    if (d < 2 || d > 3 || v.size() != d) throw DomainError("billiard needs d = 2 or 3");
    check_rho(rho);
    if (!(max_len > 0.0)) throw DomainError("max_len must be positive");
    const double vn = v.norm();
    if (!(vn > 0.0)) throw DomainError("direction must be non-zero");
    const Vec u = v / vn;

    // Coordinates along the ray scaled by rho^{d-1} and across it by 1/rho,
    // so the balls that can be hit are points of a tube of radius 1.
    const double along = std::pow(rho, d - 1);
    const Mat frame = frame_from(u);
    Mat scale = Mat::Identity(d, d) / rho;
    scale(0, 0) = along;
    const Mat basis = frame.transpose() * scale;
    const Vec q0 = q.array().floor();
    const Vec local = q - q0;
    const Vec shift = -(local.transpose() * basis).transpose();
    const LatticeBasis lattice(basis, shift);

    const double cap = along * (max_len + rho);
    double best = std::numeric_limits<double>::infinity();
    Vec best_point;
    double lo = 0.0;
    Box box{Vec(d), Vec(d)};
    for (int j = 1; j < d; ++j) {
        box.lo[j] = -1.0;
        box.hi[j] = 1.0;
    }
    while (lo < cap) {
        const double hi = std::min(cap, lo + kWindow);
        box.lo[0] = lo;
        box.hi[0] = hi;
        detail::scan_box(lattice, box, kDefaultCellBudget, [&](std::span<const double> x) {
            if (!(x[0] > 0.0) || x[0] < lo || (x[0] == lo && lo > 0.0) || x[0] >= hi) return true;
            double s2 = 0.0;
            for (int j = 1; j < d; ++j) s2 += x[j] * x[j];
            if (s2 >= 1.0) return true;
            const double entry = x[0] / along - rho * std::sqrt(1.0 - s2);
            if (entry < best) {
                best = entry;
                best_point = Eigen::Map<const Vec>(x.data(), d);
            }
            return true;
        });
        if (best <= hi / along - rho) break;
        lo = hi;
    }
    if (!(best < max_len)) return std::nullopt;
    // Points are (c - local) basis for integer centres c relative to q0.
    const Vec c = ((best_point.transpose() * basis.inverse()).transpose() + local).array().round();
    return Hit{std::max(0.0, best), c + q0};
}

std::vector<PathSample> sample_paths(const BilliardConfig& cfg) {
    if (cfg.d != 2 && cfg.d != 3) throw DomainError("--d must be 2 or 3 for the billiard");
    check_rho(cfg.rho);
    if (cfg.n == 0) throw DomainError("--n must be at least 1");
    if (!(cfg.cap_xi > 0.0)) throw DomainError("censoring length must be positive");
    const int d = cfg.d;
    const double along = std::pow(cfg.rho, d - 1);
    const double max_len = cfg.cap_xi / along;
    std::vector<PathSample> out(static_cast<std::size_t>(cfg.n));
    parallel_ranges(out.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(cfg.seed, i);
            Vec q(d);
            if (cfg.start == StartMode::from_scatterer) {
                q.setZero();
            } else {
                do {
                    for (int j = 0; j < d; ++j) q[j] = rng.uniform();
                } while (distance_to_lattice(q) <= cfg.rho);
            }
            Vec v = random_direction(d, rng);
            if (cfg.start == StartMode::after_collision) {
                // Run to the first scatterer and reflect; redraw the start if
                // the first flight is censored.
                std::optional<Hit> hit;
                while (!(hit = first_hit(q, v, cfg.rho, max_len))) {
                    do {
                        for (int j = 0; j < d; ++j) q[j] = rng.uniform();
                    } while (distance_to_lattice(q) <= cfg.rho);
                    v = random_direction(d, rng);
                }
                const Vec p = q + hit->length * v;
                const Vec normal = (p - hit->center).normalized();
                v = (v - 2.0 * v.dot(normal) * normal).normalized();
                q = p;
            }
            const std::optional<Hit> hit = first_hit(q, v, cfg.rho, max_len);
            out[i] = hit ? PathSample{along * hit->length, false} : PathSample{cfg.cap_xi, true};
        }
    });
    return out;
}

CurveEstimate empirical_ccdf(std::span<const PathSample> samples, std::span<const double> grid) {
    CurveEstimate c;
    c.n_samples = samples.size();
    c.meta = {{"kind", "ccdf"}};
    const auto n = static_cast<double>(samples.size());
    for (double g : grid) {
        std::uint64_t above = 0;
        for (const PathSample& s : samples)
            if (s.censored || s.xi > g) ++above;
        const double f = samples.empty() ? 0.0 : static_cast<double>(above) / n;
        c.xi.push_back(g);
        c.values.push_back(f);
        c.stderr_.push_back(samples.empty() ? 0.0 : std::sqrt(f * (1.0 - f) / n));
        c.counts.push_back(above);
    }
    for (const PathSample& s : samples)
        if (!s.censored) c.max_value = std::max(c.max_value, s.xi);
    return c;
}

std::string to_string(StartMode mode) {
    switch (mode) {
        case StartMode::generic: return "generic";
        case StartMode::from_scatterer: return "from-scatterer";
        case StartMode::after_collision: return "after-collision";
    }
    return "generic";
}

StartMode parse_start_mode(const std::string& text) {
    if (text == "generic") return StartMode::generic;
    if (text == "from-scatterer") return StartMode::from_scatterer;
    if (text == "after-collision") return StartMode::after_collision;
    throw DomainError("start mode must be generic, from-scatterer or after-collision");
}

void write_samples_csv(std::ostream& out, std::span<const PathSample> samples, const BilliardConfig& cfg) {
    out << "# kind=billiard\n# d=" << cfg.d << "\n# rho=" << format_double(cfg.rho) << "\n# n=" << cfg.n
        << "\n# seed=" << cfg.seed << "\n# start=" << to_string(cfg.start) << "\n# cap_xi=" << format_double(cfg.cap_xi)
        << "\n";
    out << "xi,censored\n";
    for (const PathSample& s : samples) out << format_double(s.xi) << ',' << (s.censored ? 1 : 0) << '\n';
}

void write_samples_csv(const std::filesystem::path& path, std::span<const PathSample> samples,
                       const BilliardConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open " + path.string() + " for writing");
    write_samples_csv(out, samples, cfg);
    if (!out) throw DomainError("failed writing " + path.string());
}

std::vector<PathSample> read_samples_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header != std::vector<std::string>{"xi", "censored"}) throw DomainError(path.string() + " is not a samples file");
    std::vector<PathSample> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) out.push_back({parse_double(row[0]), row[1] == "1"});
    return out;
}

}  // namespace lorentz
