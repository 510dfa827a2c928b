#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lorentz/exact.hpp"
#include "lorentz/hecke.hpp"
#include "lorentz/tail.hpp"

namespace lorentz {

/// A sampled curve: either a histogram (bin_edges has one more entry than
/// values, xi holds bin midpoints) or point values on a grid (no edges).
struct CurveEstimate {
    std::vector<double> bin_edges;
    std::vector<double> xi;
    std::vector<double> values;
    std::vector<double> stderr_;
    std::vector<std::uint64_t> counts;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    double tail_mass = 0.0;  ///< fraction of samples at or beyond the last edge
    double max_value = 0.0;  ///< largest finite sample seen
    std::vector<std::pair<std::string, std::string>> meta;

    bool operator==(const CurveEstimate&) const = default;
};

enum class SampleMode { full, random };

struct McConfig {
    std::uint64_t p = 251;
    int m = 8;
    SampleMode mode = SampleMode::full;
    std::uint64_t samples = 0;  ///< used in random mode and by the kernel estimator
    std::uint64_t seed = 1;
    RotationParams rotation = RotationParams::fixed();
    Vec x0 = default_offset();
    /// Viewing directions per lattice for the unshifted curve: each sampled
    /// lattice is probed along this many fixed, nearly uniform directions on
    /// a hemisphere (1 keeps the single direction e1).
    int directions = 1;

    static Vec default_offset();  ///< (sqrt 2, sqrt 3, sqrt 5)
};

/// Density of the free path from a generic point in d = 3: histogram of the
/// first tube hit over the lattices (Z^3 + x) M, M from the Hecke set and x
/// from the shifted torus grid (full) or uniform (random).
CurveEstimate mc_phi_curve(const McConfig& cfg, double delta, double xi_max);

/// Rotations whose first row runs through a Fibonacci set of `count` unit
/// vectors on the upper hemisphere; count = 1 gives the identity.
std::vector<Mat> hemisphere_frames(int count);

/// Same for the unshifted lattices Z^3 M (free path leaving a scatterer).
/// With several directions each one contributes a sample to the histogram
/// and the standard errors are taken between lattices.
CurveEstimate mc_phi0_curve(const McConfig& cfg, double delta, double xi_max);

/// One kernel value at (xi, w, z): zeta(3)^{-1} times the fraction of sampled
/// (v, A) for which the lattice avoids the cylinder. cfg.p sets the planar
/// Hecke sampler and cfg.samples the sample count.
Estimate mc_phi0_kernel(double xi, const Vec2& w, const Vec2& z, const McConfig& cfg);

/// Tail integral of a histogram density at each edge: 1 - sum of mass to the left.
std::vector<double> curve_survival(const CurveEstimate& curve);

void write_curve_csv(const std::filesystem::path& path, const CurveEstimate& curve);
void write_curve_csv(std::ostream& out, const CurveEstimate& curve);
CurveEstimate read_curve_csv(const std::filesystem::path& path);

std::string to_string(SampleMode mode);
std::string to_string(const RotationParams& rotation);
RotationParams parse_rotation(const std::string& text);

}  // namespace lorentz
