#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lorentz/curves.hpp"
#include "lorentz/lattice.hpp"

namespace lorentz {

/// Where each flight starts: a uniform point outside the scatterers, the
/// centre of the scatterer at the origin (its own ball ignored), or the exit
/// point of a specular reflection at the first scatterer hit from a generic start.
enum class StartMode { generic, from_scatterer, after_collision };

struct BilliardConfig {
    int d = 3;
    double rho = 0.02;
    std::uint64_t n = 100000;
    std::uint64_t seed = 1;
    StartMode start = StartMode::generic;
    double cap_xi = 10.0;  ///< censoring length in macroscopic units
};

struct Hit {
    double length = 0.0;  ///< microscopic distance to the sphere surface
    Vec center;           ///< integer centre of the sphere hit
};

/// First ball of radius rho centred on Z^d met by the ray q + s v, s > 0.
/// Balls whose centre lies behind q along v are ignored, so q may sit on the
/// surface or at the centre of the ball it is leaving. nullopt if nothing is
/// met before max_len.
std::optional<Hit> first_hit(const Vec& q, const Vec& v, double rho, double max_len);

struct PathSample {
    double xi = 0.0;  ///< rho^{d-1} times the free path length
    bool censored = false;

    bool operator==(const PathSample&) const = default;
};

std::vector<PathSample> sample_paths(const BilliardConfig& cfg);

/// Fraction of samples with xi greater than each grid point; censored samples
/// count as greater than every grid point.
CurveEstimate empirical_ccdf(std::span<const PathSample> samples, std::span<const double> grid);

void write_samples_csv(const std::filesystem::path& path, std::span<const PathSample> samples,
                       const BilliardConfig& cfg);
void write_samples_csv(std::ostream& out, std::span<const PathSample> samples, const BilliardConfig& cfg);
std::vector<PathSample> read_samples_csv(const std::filesystem::path& path);

std::string to_string(StartMode mode);
StartMode parse_start_mode(const std::string& text);

}  // namespace lorentz
