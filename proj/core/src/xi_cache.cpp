#include "lorentz/xi_cache.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "lorentz/csv.hpp"
#include "lorentz/error.hpp"
#include "lorentz/parallel.hpp"

namespace lorentz {
namespace {

void check_grid(const XiGrid& g) {
    if (g.dim < 2 || g.dim > 3) throw DomainError("Xi table supports lattice dimension 2 or 3");
    if (!(g.sigma_max > 0.0) || g.n_sigma < 2) throw DomainError("Xi table needs sigma_max > 0 and two sigma nodes");
    if (!(g.v_min > 0.0) || !(g.v_max > g.v_min) || g.n_v < 2)
        throw DomainError("Xi table needs 0 < v_min < v_max and two v nodes");
}

}  // namespace

double XiCache::sigma_node(int i) const {
    if (i == grid_.n_sigma - 1) return grid_.sigma_max;
    return grid_.sigma_max * i / (grid_.n_sigma - 1);
}

double XiCache::v_node(int j) const {
    if (j == 0) return grid_.v_min;
    if (j == grid_.n_v - 1) return grid_.v_max;
    const double lo = std::log(grid_.v_min);
    const double hi = std::log(grid_.v_max);
    return std::exp(lo + (hi - lo) * j / (grid_.n_v - 1));
}

const Estimate& XiCache::cell(int i, int j) const {
    if (i < 0 || i >= grid_.n_sigma || j < 0 || j >= grid_.n_v) throw CoverageError("Xi table cell out of range");
    return cells_[static_cast<std::size_t>(i) * grid_.n_v + j];
}

std::uint64_t XiCache::cell_seed(int i, int j) const {
    return mix_seed(seed_, static_cast<std::uint64_t>(i) * grid_.n_v + static_cast<std::uint64_t>(j));
}

XiCache XiCache::build(const XiGrid& grid, const HeckeSampler& sampler, std::uint64_t samples, std::uint64_t seed) {
    check_grid(grid);
    if (sampler.dim() != grid.dim) throw DomainError("sampler dimension does not match the table");
    if (samples == 0) throw DomainError("need at least one sample per cell");
    XiCache cache;
    cache.grid_ = grid;
    cache.seed_ = seed;
    cache.prime_ = sampler.prime();
    cache.cells_.assign(static_cast<std::size_t>(grid.n_sigma) * grid.n_v, Estimate{});
    parallel_ranges(
        static_cast<std::size_t>(grid.n_sigma),
        [&](std::size_t begin, std::size_t end) {
            for (auto i = static_cast<int>(begin); i < static_cast<int>(end); ++i) {
                bool zero = false;
                for (int j = grid.n_v - 1; j >= 0; --j) {
                    Estimate& out = cache.cells_[static_cast<std::size_t>(i) * grid.n_v + j];
                    if (zero) {
                        out = {0.0, 0.0, samples};
                        continue;
                    }
                    const XiQuery q = XiQuery::single(grid.dim, cache.sigma_node(i), cache.v_node(j));
                    const std::uint64_t cell_seed = cache.cell_seed(i, j);
                    std::uint64_t hits = 0;
                    for (std::uint64_t s = 0; s < samples; ++s) {
                        Rng rng(cell_seed, s);
                        if (xi_avoids(q, sampler.sample(rng))) ++hits;
                    }
                    const double p = static_cast<double>(hits) / static_cast<double>(samples);
                    out = {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), samples};
                    zero = hits == 0;
                }
            }
        },
        1);
    cache.finish();
    return cache;
}

void XiCache::finish() {
    zero_column_ = true;
    for (int i = 0; i < grid_.n_sigma; ++i) zero_column_ = zero_column_ && cell(i, 0).value == 0.0;
}

void XiCache::save_csv(std::ostream& out) const {
    out << "# table=xi\n";
    out << "# dim=" << grid_.dim << "\n";
    out << "# p=" << prime_ << "\n";
    out << "# seed=" << seed_ << "\n";
    out << "# sigma_max=" << format_double(grid_.sigma_max) << "\n";
    out << "# n_sigma=" << grid_.n_sigma << "\n";
    out << "# v_min=" << format_double(grid_.v_min) << "\n";
    out << "# v_max=" << format_double(grid_.v_max) << "\n";
    out << "# n_v=" << grid_.n_v << "\n";
    out << "sigma,v,estimate,stderr,n,seed\n";
    for (int i = 0; i < grid_.n_sigma; ++i)
        for (int j = 0; j < grid_.n_v; ++j) {
            const Estimate& e = cell(i, j);
            out << format_double(sigma_node(i)) << ',' << format_double(v_node(j)) << ',' << format_double(e.value)
                << ',' << format_double(e.stderr_) << ',' << e.n << ',' << cell_seed(i, j) << '\n';
        }
}

void XiCache::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open " + path.string() + " for writing");
    save_csv(out);
    if (!out) throw DomainError("failed writing " + path.string());
}

XiCache XiCache::load_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header != std::vector<std::string>{"sigma", "v", "estimate", "stderr", "n", "seed"})
        throw DomainError(path.string() + " is not a Xi table");
    XiCache cache;
    XiGrid& g = cache.grid_;
    g.dim = std::stoi(table.meta_value("dim"));
    g.sigma_max = parse_double(table.meta_value("sigma_max"));
    g.n_sigma = std::stoi(table.meta_value("n_sigma"));
    g.v_min = parse_double(table.meta_value("v_min"));
    g.v_max = parse_double(table.meta_value("v_max"));
    g.n_v = std::stoi(table.meta_value("n_v"));
    cache.seed_ = std::stoull(table.meta_value("seed"));
    cache.prime_ = std::stoull(table.meta_value("p"));
    check_grid(g);
    if (table.rows.size() != static_cast<std::size_t>(g.n_sigma) * g.n_v)
        throw DomainError(path.string() + " has the wrong number of rows");
    cache.cells_.reserve(table.rows.size());
    for (const auto& row : table.rows)
        cache.cells_.push_back({parse_double(row[2]), parse_double(row[3]), std::stoull(row[4])});
    cache.finish();
    return cache;
}

void XiCache::column_weights(double v, int& j0, double& t) const {
    const double lo = std::log(grid_.v_min);
    const double hi = std::log(grid_.v_max);
    const double u = (std::log(v) - lo) / (hi - lo) * (grid_.n_v - 1);
    j0 = std::clamp(static_cast<int>(std::floor(u)), 0, grid_.n_v - 2);
    t = std::clamp(u - j0, 0.0, 1.0);
}

double XiCache::operator()(double sigma, double v) const {
    sigma = std::abs(sigma);
    if (sigma > grid_.sigma_max * (1.0 + 1e-12)) throw CoverageError("sigma beyond the Xi table");
    if (!(v > 0.0)) throw DomainError("v must be positive");
    if (v < grid_.v_min) {
        if (zero_column_) return 0.0;
        throw CoverageError("v below the Xi table");
    }
    if (v > grid_.v_max * (1.0 + 1e-12)) throw CoverageError("v above the Xi table");
    int j0 = 0;
    double t = 0.0;
    column_weights(v, j0, t);
    const double step = grid_.sigma_max / (grid_.n_sigma - 1);
    const int i0 = std::clamp(static_cast<int>(std::floor(sigma / step)), 0, grid_.n_sigma - 2);
    const double s = std::clamp(sigma / step - i0, 0.0, 1.0);
    auto at = [&](int i) { return (1.0 - t) * cell(i, j0).value + t * cell(i, j0 + 1).value; };
    return (1.0 - s) * at(i0) + s * at(i0 + 1);
}

double XiCache::sigma_integral(double v, int node_cut, int power) const {
    if (power != 0 && power != 1) throw DomainError("sigma weight must be 1 or sigma");
    if (node_cut < 0 || node_cut >= grid_.n_sigma) throw CoverageError("sigma cut beyond the Xi table");
    if (!(v > 0.0)) throw DomainError("v must be positive");
    if (v < grid_.v_min) {
        if (zero_column_) return 0.0;
        throw CoverageError("v below the Xi table");
    }
    if (v > grid_.v_max * (1.0 + 1e-12)) throw CoverageError("v above the Xi table");
    int j0 = 0;
    double t = 0.0;
    column_weights(v, j0, t);
    double total = 0.0;
    double prev = (1.0 - t) * cell(0, j0).value + t * cell(0, j0 + 1).value;
    for (int i = 1; i <= node_cut; ++i) {
        const double cur = (1.0 - t) * cell(i, j0).value + t * cell(i, j0 + 1).value;
        const double a = sigma_node(i - 1);
        const double b = sigma_node(i);
        const double h = b - a;
        // Exact for a linear interpolant times 1 or sigma.
        total += power == 0 ? 0.5 * h * (prev + cur) : h / 6.0 * (prev * (2.0 * a + b) + cur * (a + 2.0 * b));
        prev = cur;
    }
    return total;
}

}  // namespace lorentz
