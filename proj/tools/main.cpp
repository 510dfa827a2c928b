// Command-line front end for the free path and collision kernel library.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorentz/billiard.hpp"
#include "lorentz/csv.hpp"
#include "lorentz/curves.hpp"
#include "lorentz/error.hpp"
#include "lorentz/exact.hpp"
#include "lorentz/special.hpp"
#include "lorentz/tail.hpp"
#include "lorentz/xi_cache.hpp"
#include "validation.hpp"

namespace {

using namespace lorentz;

constexpr int kUsageError = 1;
constexpr int kValidationFailed = 2;

std::string sig15(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

void constant(std::ostream& out, const std::string& name, double value, const std::string& symbolic) {
    out << name << " = " << sig15(value) << "  # " << symbolic << '\n';
}

Vec2 parse_vec2(const std::string& text, const std::string& flag) {
    const std::vector<std::string> parts = split(text, ',');
    if (parts.size() != 2) throw DomainError(flag + " expects two comma-separated reals, got '" + text + "'");
    try {
        return {parse_double(parts[0]), parse_double(parts[1])};
    } catch (const std::exception&) {
        throw DomainError(flag + " expects two comma-separated reals, got '" + text + "'");
    }
}

Vec parse_vec(const std::string& text, const std::string& flag) {
    const std::vector<std::string> parts = split(text, ',');
    Vec v(static_cast<Eigen::Index>(parts.size()));
    try {
        for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
    } catch (const std::exception&) {
        throw DomainError(flag + " expects comma-separated reals, got '" + text + "'");
    }
    return v;
}

// Runs `write` on the --out file, or on stdout when no file was given.
template <class Write>
void emit(const std::string& out, Write&& write) {
    if (out.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream file(out);
    if (!file) throw DomainError("cannot open " + out + " for writing");
    write(file);
    if (!file) throw DomainError("failed writing " + out);
}

struct CurveFlags {
    std::uint64_t p = 0;
    int m = 8;
    double delta = 0.02;
    double xi_max = 2.0;
    std::uint64_t seed = 1;
    std::string mode;
    std::uint64_t samples = 0;
    std::string rotation;
    int directions = 1;
    std::string x0;
    std::string out;
};

void add_curve_flags(CLI::App* cmd, CurveFlags& f) {
    cmd->add_option("--p", f.p, "Hecke prime")->capture_default_str();
    cmd->add_option("--m", f.m, "torus grid size per axis (full mode)")->capture_default_str()->check(CLI::Range(1, 1000));
    cmd->add_option("--delta", f.delta, "bin width")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--xi-max", f.xi_max, "histogram range, a multiple of --delta")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "master seed")->capture_default_str();
    cmd->add_option("--mode", f.mode, "full or random")->capture_default_str()->check(CLI::IsMember({"full", "random"}));
    cmd->add_option("--samples", f.samples, "samples in random mode")->capture_default_str();
    cmd->add_option("--rotation", f.rotation, "fixed, identity, per-sample or random:<seed>")->capture_default_str();
    cmd->add_option("--x0", f.x0, "torus offset, three comma-separated reals");
    cmd->add_option("--out", f.out, "output CSV (stdout if omitted)");
}

McConfig to_config(const CurveFlags& f) {
    McConfig cfg;
    cfg.p = f.p;
    cfg.m = f.m;
    cfg.seed = f.seed;
    cfg.mode = f.mode == "random" ? SampleMode::random : SampleMode::full;
    cfg.samples = f.samples;
    cfg.rotation = parse_rotation(f.rotation);
    cfg.directions = f.directions;
    if (!f.x0.empty()) cfg.x0 = parse_vec(f.x0, "--x0");
    return cfg;
}

int run_exact(const std::string& which, double xi, const std::string& w_text, const std::string& z_text, int d) {
    const double pi = std::numbers::pi;
    const double z3 = zeta(3);
    auto& out = std::cout;
    if (which == "phi0-small" || which == "phi-small" || which == "phibar0-small") {
        const SmallXiAggregates a = smallxi_aggregates_3d(xi);
        if (which == "phi0-small") {
            if (!a.phi0_valid) throw ValidityError("closed form holds for xi <= 2/(3 sqrt 3) = 0.3849...");
            const double slope = 3.0 * (4.0 * pi + 3.0 * std::sqrt(3.0)) / (4.0 * pi * z3);
            out << "phi0(" << sig15(xi) << ") = " << sig15(a.phi0) << '\n';
            out << "# = pi/zeta(3) - c*xi with pi/zeta(3) = " << sig15(pi / z3)
                << ", c = 3*(4*pi+3*sqrt(3))/(4*pi*zeta(3)) = " << sig15(slope) << '\n';
        } else if (which == "phi-small") {
            if (!a.phi_valid) throw ValidityError("closed form holds for xi <= 1/4");
            out << "phi(" << sig15(xi) << ") = " << sig15(a.phi) << '\n';
            out << "# = pi - (pi^2/zeta(3))*xi + ((3*pi^2+16)/(2*pi*zeta(3)))*xi^2\n";
        } else {
            if (!a.phibar0_valid) throw ValidityError("closed form holds for xi <= 1/4");
            out << "phibar0(" << sig15(xi) << ") = " << sig15(a.phibar0) << '\n';
            out << "# = pi/zeta(3) - ((3*pi^2+16)/(pi^2*zeta(3)))*xi\n";
        }
        return 0;
    }
    if (which == "kernel-3d") {
        const Vec2 w = parse_vec2(w_text, "--w");
        const Vec2 z = parse_vec2(z_text, "--z");
        out << "kernel(" << sig15(xi) << ") = " << sig15(phi0_3d_smallxi(xi, w, z)) << '\n';
        out << "# = (1 - (6/pi^2)*F(|w-z|/2)*xi)/zeta(3), valid up to xi1 = " << sig15(xi1(w, z)) << '\n';
        return 0;
    }
    if (which == "kernel-2d") {
        const double w = parse_double(w_text);
        const double z = parse_double(z_text);
        out << "kernel(" << sig15(xi) << ") = " << sig15(phi0_2d(xi, w, z)) << "  # (6/pi^2)*clamp(...)\n";
        return 0;
    }
    if (which == "phi-w") {
        const double w = parse_vec2(w_text, "--w").norm();
        out << "phi(" << sig15(xi) << ", |w|=" << sig15(w) << ") = " << sig15(phi_3d_smallxi(xi, w)) << '\n';
        out << "# = 1 - (pi/zeta(3))*xi + (6/(pi^2*zeta(3)))*G(|w|)*xi^2\n";
        return 0;
    }
    if (which == "g") {
        const double w = parse_double(w_text);
        constant(out, "G(" + sig15(w) + ")", g_of_w(w), "(1/2) * integral over the unit disc of F(|w-z|/2) dz");
        return 0;
    }
    if (which == "bounds") {
        const KernelBounds b = kernel_bounds(d, xi);
        constant(out, "lower", b.lower, "(1 - 2^(d-1)*v_(d-1)*xi)/zeta(d)");
        constant(out, "upper", b.upper, "1/zeta(d)");
        return 0;
    }
    if (which == "leading") {
        const LeadingTerms l = smallxi_general_d(d);
        constant(out, "phibar0(0)", l.phibar0, "v_(d-1)/zeta(d)");
        constant(out, "phi0(0)", l.phi0, "v_(d-1)/zeta(d)");
        constant(out, "phi(0)", l.phi, "v_(d-1)");
        return 0;
    }
    throw DomainError("--which must be one of phi0-small, phi-small, phibar0-small, kernel-3d, kernel-2d, phi-w, g, "
                      "bounds, leading (got '" + which + "')");
}

int run_tail(int d) {
    auto& out = std::cout;
    out << "# d = " << d << '\n';
    constant(out, "phi_tail_coefficient", phi_tail_coefficient(d),
             "pi^((d-1)/2)/(2^d*d*Gamma((d+3)/2)*zeta(d)), phi ~ c*xi^-2");
    constant(out, "phibar0_tail_coefficient", phibar0_tail_coefficient(d), "2^(2-d)/(d*(d+1)*zeta(d)), phibar0 ~ c*xi^-3");
    constant(out, "integral_F", f_integral_exact(d), "2^(1-d)/((d-1)*d*(d+1)*zeta(d))");
    try {
        const double x0 = xi0_zero(d);
        const char* sym = d == 2 ? "1" : d == 3 ? "2/sqrt(3)" : "sqrt(2)";
        constant(out, "xi0(0)", x0, sym);
    } catch (const DomainError& e) {
        out << "# xi0(0): " << e.what() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free path lengths and collision kernels of the periodic Lorentz gas"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    CurveFlags phi_flags;
    phi_flags.p = 251;
    phi_flags.mode = "full";
    phi_flags.rotation = "fixed";
    auto* phi = app.add_subcommand("curve-phi", "Histogram of the free path from a generic point (d = 3)");
    add_curve_flags(phi, phi_flags);

    CurveFlags phi0_flags;
    phi0_flags.p = 10007;
    phi0_flags.mode = "random";
    phi0_flags.samples = 200000;
    phi0_flags.rotation = "per-sample";
    phi0_flags.directions = 32;
    phi0_flags.xi_max = 1.2;
    auto* phi0 = app.add_subcommand("curve-phi0", "Histogram of the free path leaving a scatterer (d = 3)");
    add_curve_flags(phi0, phi0_flags);
    phi0->add_option("--directions", phi0_flags.directions, "viewing directions per lattice")
        ->capture_default_str()
        ->check(CLI::Range(1, 4096));

    double k_xi = 0.2;
    std::string k_w = "0,0";
    std::string k_z = "0,0";
    std::uint64_t k_p = 10007;
    std::uint64_t k_samples = 100000;
    std::uint64_t k_seed = 1;
    auto* kernel = app.add_subcommand("kernel-phi0", "Monte Carlo collision kernel at (xi, w, z) in d = 3");
    kernel->add_option("--xi", k_xi, "free path")->capture_default_str()->check(CLI::PositiveNumber);
    kernel->add_option("--w", k_w, "exit parameter, two reals with norm < 1")->capture_default_str();
    kernel->add_option("--z", k_z, "entry parameter, two reals with norm < 1")->capture_default_str();
    kernel->add_option("--p", k_p, "planar Hecke prime")->capture_default_str();
    kernel->add_option("--samples", k_samples, "sample count")->capture_default_str()->check(CLI::Range(1ULL, 1000000000000ULL));
    kernel->add_option("--seed", k_seed, "seed")->capture_default_str();

    std::string e_which = "phi0-small";
    double e_xi = 0.2;
    std::string e_w = "0,0";
    std::string e_z = "0,0";
    int e_d = 3;
    auto* exact = app.add_subcommand("exact", "Closed-form small-xi densities and kernels");
    exact->add_option("--which", e_which, "phi0-small, phi-small, phibar0-small, kernel-3d, kernel-2d, phi-w, g, bounds, leading")
        ->capture_default_str();
    exact->add_option("--xi", e_xi, "free path")->capture_default_str()->check(CLI::NonNegativeNumber);
    exact->add_option("--w", e_w, "exit parameter (two reals; one real for kernel-2d and g)")->capture_default_str();
    exact->add_option("--z", e_z, "entry parameter")->capture_default_str();
    exact->add_option("--d", e_d, "dimension for bounds and leading")->capture_default_str()->check(CLI::Range(2, 12));

    int t_d = 3;
    auto* tail = app.add_subcommand("tail", "Large-xi constants");
    tail->add_option("--d", t_d, "dimension")->capture_default_str()->check(CLI::Range(2, 12));

    std::string x_w = "0,0";
    std::string x_z = "0,0";
    auto* x1 = app.add_subcommand("xi1", "Validity limit of the small-xi kernel formula");
    x1->add_option("--w", x_w, "exit parameter, two reals with norm <= 1")->capture_default_str();
    x1->add_option("--z", x_z, "entry parameter, two reals with norm <= 1")->capture_default_str();

    XiGrid grid;
    std::uint64_t c_samples = 1000;
    std::uint64_t c_seed = 1;
    std::uint64_t c_p = 10007;
    std::string c_out;
    auto* cache = app.add_subcommand("xi-cache", "Tabulate the lattice avoidance probability for the large-xi profiles");
    cache->add_option("--d", grid.dim, "lattice dimension (d - 1 of the gas)")->capture_default_str()->check(CLI::Range(2, 3));
    cache->add_option("--samples", c_samples, "lattices per cell")->capture_default_str()->check(CLI::Range(1ULL, 100000000ULL));
    cache->add_option("--seed", c_seed, "seed")->capture_default_str();
    cache->add_option("--p", c_p, "Hecke prime")->capture_default_str();
    cache->add_option("--sigma-max", grid.sigma_max, "largest sigma node")->capture_default_str()->check(CLI::PositiveNumber);
    cache->add_option("--n-sigma", grid.n_sigma, "sigma nodes")->capture_default_str()->check(CLI::Range(2, 100000));
    cache->add_option("--v-min", grid.v_min, "smallest v node")->capture_default_str()->check(CLI::PositiveNumber);
    cache->add_option("--v-max", grid.v_max, "largest v node")->capture_default_str()->check(CLI::PositiveNumber);
    cache->add_option("--n-v", grid.n_v, "v nodes")->capture_default_str()->check(CLI::Range(2, 100000));
    cache->add_option("--out", c_out, "output CSV (stdout if omitted)");

    std::string f_cache;
    std::uint64_t f_samples = 500;
    std::uint64_t f_seed = 1;
    double f_t = -1.0;
    double f_t_max = 1.2;
    int f_points = 25;
    bool f_integral = false;
    std::string f_out;
    auto* fd = app.add_subcommand("fd", "Large-xi profiles F_d and G_d from a probability table (d = 3)");
    fd->add_option("--cache", f_cache, "table written by xi-cache; built on the fly if omitted");
    fd->add_option("--samples", f_samples, "lattices per cell when building")->capture_default_str();
    fd->add_option("--seed", f_seed, "seed when building")->capture_default_str();
    fd->add_option("--t", f_t, "single evaluation point");
    fd->add_option("--t-max", f_t_max, "grid end")->capture_default_str()->check(CLI::PositiveNumber);
    fd->add_option("--points", f_points, "grid points")->capture_default_str()->check(CLI::Range(2, 100000));
    fd->add_flag("--integral", f_integral, "print the integral of F_d and the closed form");
    fd->add_option("--out", f_out, "output CSV (stdout if omitted)");

    BilliardConfig b_cfg;
    std::string b_start = "generic";
    std::string b_out;
    std::string b_ccdf;
    double b_grid_max = 2.0;
    double b_grid_step = 0.02;
    auto* sim = app.add_subcommand("simulate", "Direct flights in the sphere array");
    sim->add_option("--d", b_cfg.d, "dimension")->capture_default_str()->check(CLI::IsMember({2, 3}));
    sim->add_option("--rho", b_cfg.rho, "scatterer radius in (0, 0.5)")->capture_default_str()->check(CLI::Range(0.0, 0.5));
    sim->add_option("--n", b_cfg.n, "number of flights")->capture_default_str()->check(CLI::Range(1ULL, 10000000000ULL));
    sim->add_option("--seed", b_cfg.seed, "seed")->capture_default_str();
    sim->add_option("--start", b_start, "generic, from-scatterer or after-collision")
        ->capture_default_str()
        ->check(CLI::IsMember({"generic", "from-scatterer", "after-collision"}));
    sim->add_option("--cap", b_cfg.cap_xi, "censoring length, macroscopic units")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--out", b_out, "samples CSV (stdout if omitted)");
    sim->add_option("--ccdf", b_ccdf, "also write the empirical ccdf here");
    sim->add_option("--grid-max", b_grid_max, "ccdf grid end")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--grid-step", b_grid_step, "ccdf grid step")->capture_default_str()->check(CLI::PositiveNumber);

    std::string v_suite = "all";
    bool v_fast = false;
    std::uint64_t v_seed = 1;
    auto* val = app.add_subcommand("validate", "Run the acceptance checks");
    val->add_option("--suite", v_suite, "small-xi, tail, support, invariants or all")->capture_default_str();
    val->add_flag("--fast", v_fast, "desk-scale sampling");
    val->add_option("--seed", v_seed, "seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (phi->parsed()) {
            const McConfig cfg = to_config(phi_flags);
            const CurveEstimate c = mc_phi_curve(cfg, phi_flags.delta, phi_flags.xi_max);
            emit(phi_flags.out, [&](std::ostream& o) { write_curve_csv(o, c); });
        } else if (phi0->parsed()) {
            const McConfig cfg = to_config(phi0_flags);
            const CurveEstimate c = mc_phi0_curve(cfg, phi0_flags.delta, phi0_flags.xi_max);
            emit(phi0_flags.out, [&](std::ostream& o) { write_curve_csv(o, c); });
        } else if (kernel->parsed()) {
            McConfig cfg;
            cfg.p = k_p;
            cfg.samples = k_samples;
            cfg.seed = k_seed;
            const Vec2 w = parse_vec2(k_w, "--w");
            const Vec2 z = parse_vec2(k_z, "--z");
            if (!is_prime(k_p)) throw DomainError("--p must be prime");
            const Estimate e = mc_phi0_kernel(k_xi, w, z, cfg);
            const KernelBounds b = kernel_bounds(3, k_xi);
            std::cout << "xi,w1,w2,z1,z2,estimate,stderr,n,lower,upper,closed_form\n";
            std::cout << format_double(k_xi) << ',' << format_double(w[0]) << ',' << format_double(w[1]) << ','
                      << format_double(z[0]) << ',' << format_double(z[1]) << ',' << format_double(e.value) << ','
                      << format_double(e.stderr_) << ',' << e.n << ',' << format_double(b.lower) << ','
                      << format_double(b.upper) << ',';
            if (k_xi <= xi1(w, z)) {
                std::cout << format_double(phi0_3d_smallxi(k_xi, w, z)) << '\n';
            } else {
                std::cout << "nan\n";
            }
        } else if (exact->parsed()) {
            return run_exact(e_which, e_xi, e_w, e_z, e_d);
        } else if (tail->parsed()) {
            return run_tail(t_d);
        } else if (x1->parsed()) {
            const Vec2 w = parse_vec2(x_w, "--w");
            const Vec2 z = parse_vec2(x_z, "--z");
            constant(std::cout, "xi1", xi1(w, z), "1/(6*V), V the largest tetrahedron volume");
            constant(std::cout, "inf_z xi1", xi1_inf_over_z(w.norm()), "min(1/(2*(1+|w|)), 2/(3*sqrt(3)))");
        } else if (cache->parsed()) {
            if (!is_prime(c_p)) throw DomainError("--p must be prime");
            const HeckeSampler sampler(grid.dim, c_p);
            const XiCache table = XiCache::build(grid, sampler, c_samples, c_seed);
            emit(c_out, [&](std::ostream& o) { table.save_csv(o); });
        } else if (fd->parsed()) {
            const XiCache table = f_cache.empty() ? XiCache::build(XiGrid{}, HeckeSampler(2, 10007), f_samples, f_seed)
                                                  : XiCache::load_csv(f_cache);
            if (table.dim() != 2) throw DomainError("fd needs a table with lattice dimension 2 (d = 3)");
            if (f_integral) {
                constant(std::cout, "integral_F_quadrature", f_d_integral(table), "quadrature over the table");
                constant(std::cout, "integral_F_exact", f_integral_exact(3), "1/(96*zeta(3))");
                constant(std::cout, "support_edge_table", f_d_support(table), "first t with F_3 = 0 on the table");
                constant(std::cout, "support_edge", std::pow(xi0_zero(3), 2.0 / 3.0), "(2/sqrt(3))^(2/3)");
                return 0;
            }
            std::ostringstream csv;
            csv << "# table_seed=" << table.master_seed() << "\n# p=" << table.prime() << "\nt,F,G\n";
            std::vector<double> ts;
            if (f_t > 0.0) {
                ts.push_back(f_t);
            } else {
                for (int i = 0; i < f_points; ++i) ts.push_back(f_t_max * (i + 1) / f_points);
            }
            for (double t : ts)
                csv << format_double(t) << ',' << format_double(f_d_quad(t, table)) << ','
                    << format_double(g_d_quad(t, table)) << '\n';
            emit(f_out, [&](std::ostream& o) { o << csv.str(); });
        } else if (sim->parsed()) {
            b_cfg.start = parse_start_mode(b_start);
            const std::vector<PathSample> samples = sample_paths(b_cfg);
            emit(b_out, [&](std::ostream& o) { write_samples_csv(o, samples, b_cfg); });
            if (!b_ccdf.empty()) {
                std::vector<double> g;
                const auto steps = static_cast<int>(std::floor(b_grid_max / b_grid_step + 1e-9));
                for (int i = 0; i <= steps; ++i) g.push_back(i * b_grid_step);
                CurveEstimate c = empirical_ccdf(samples, g);
                c.seed = b_cfg.seed;
                c.meta.emplace_back("rho", format_double(b_cfg.rho));
                c.meta.emplace_back("d", std::to_string(b_cfg.d));
                c.meta.emplace_back("start", to_string(b_cfg.start));
                write_curve_csv(b_ccdf, c);
            }
        } else if (val->parsed()) {
            const validation::Suite suite = validation::parse_suite(v_suite);
            validation::Options opts;
            opts.fast = v_fast;
            opts.seed = v_seed;
            opts.log = [](const std::string& line) { std::cerr << "# " << line << std::endl; };
            bool all = true;
            validation::run(validation::suite_criteria(suite), opts, [&](const validation::Result& r) {
                std::cout << validation::format(r) << std::endl;
                all = all && r.passed;
            });
            return all ? 0 : kValidationFailed;
        }
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ValidityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return 0;
}
