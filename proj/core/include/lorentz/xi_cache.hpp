#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "lorentz/hecke.hpp"
#include "lorentz/tail.hpp"

namespace lorentz {

struct XiGrid {
    int dim = 2;  ///< lattice dimension d - 1
    double sigma_max = 128.0;
    int n_sigma = 257;  ///< linear nodes on [0, sigma_max]
    double v_min = 0.02;
    double v_max = 200.0;
    int n_v = 41;  ///< logarithmic nodes on [v_min, v_max]
};

/// Table of Monte Carlo estimates of the single-parameter probability on a
/// linear-sigma by log-v grid, bilinear in (sigma, log v) between nodes.
class XiCache {
public:
    /// Cell (i, j) is estimated from `samples` lattices seeded by
    /// (seed, i * n_v + j). Along each sigma row, once a cell estimates to
    /// exactly zero every smaller v is set to zero as well (the probability
    /// is nondecreasing in v).
    static XiCache build(const XiGrid& grid, const HeckeSampler& sampler, std::uint64_t samples,
                         std::uint64_t seed);
    static XiCache load_csv(const std::filesystem::path& path);
    void save_csv(const std::filesystem::path& path) const;
    void save_csv(std::ostream& out) const;

    [[nodiscard]] const XiGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int dim() const noexcept { return grid_.dim; }
    [[nodiscard]] double sigma_node(int i) const;
    [[nodiscard]] double v_node(int j) const;
    [[nodiscard]] const Estimate& cell(int i, int j) const;
    [[nodiscard]] std::uint64_t cell_seed(int i, int j) const;
    [[nodiscard]] std::uint64_t master_seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t prime() const noexcept { return prime_; }

    /// Interpolated probability. Below v_min it is zero when the whole
    /// v_min column is zero; everything else outside the grid throws
    /// CoverageError.
    [[nodiscard]] double operator()(double sigma, double v) const;
    /// Exact integral over sigma in [0, sigma_cut] of the interpolant
    /// times sigma^power (power 0 or 1), with sigma_cut a node.
    [[nodiscard]] double sigma_integral(double v, int node_cut, int power) const;
    /// True iff every cell of the v_min column estimated to zero.
    [[nodiscard]] bool zero_below_grid() const noexcept { return zero_column_; }

private:
    XiGrid grid_;
    std::uint64_t seed_ = 0;
    std::uint64_t prime_ = 0;
    std::vector<Estimate> cells_;
    bool zero_column_ = false;

    void finish();
    void column_weights(double v, int& j0, double& t) const;
};

}  // namespace lorentz
