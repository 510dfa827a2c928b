#pragma once

#include <cstdint>
#include <vector>

#include "lorentz/lattice.hpp"
#include "lorentz/rng.hpp"

namespace lorentz {

bool is_prime(std::uint64_t n) noexcept;

/// Upper-triangular integer representatives of the index-p sublattices of
/// Z^d (d = 2 or 3), listed as
///   d = 2: diag(p,1), (1 a; 0 p)
///   d = 3: diag(p,1,1), (1 a 0; 0 p 0; 0 0 1), (1 0 a; 0 1 b; 0 0 p)
/// with 0 <= a, b < p. Index 0 is the diagonal element.
class HeckeSet {
public:
    HeckeSet(int dim, std::uint64_t p);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] std::uint64_t prime() const noexcept { return p_; }
    [[nodiscard]] std::uint64_t size() const noexcept;
    /// Integer matrix stored in doubles (exact up to 2^53).
    [[nodiscard]] Mat element(std::uint64_t index) const;
    /// LLL-reduced element, still integral.
    [[nodiscard]] Mat reduced_element(std::uint64_t index) const;

private:
    int dim_;
    std::uint64_t p_;
};

std::vector<Mat> hecke_enumerate(int dim, std::uint64_t p);

/// Orthogonal matrix applied on the right of a Hecke element.
struct RotationParams {
    enum class Kind { fixed, identity, random, per_sample };
    Kind kind = Kind::fixed;
    std::uint64_t seed = 0;

    static RotationParams fixed() { return {Kind::fixed, 0}; }
    static RotationParams identity() { return {Kind::identity, 0}; }
    static RotationParams random(std::uint64_t seed) { return {Kind::random, seed}; }
    /// A fresh Haar rotation for every sampled lattice, drawn from that
    /// sample's own stream; matrix() then returns the identity.
    static RotationParams per_sample() { return {Kind::per_sample, 0}; }

    /// fixed: Rz(1/2) Rx(1) Rz(3/2) for d = 3 and the planar rotation by
    /// angle 1 for d = 2. random: Haar-distributed element of SO(d).
    [[nodiscard]] Mat matrix(int dim) const;
};

/// Haar-random element of SO(dim), dim in 2..4.
Mat random_rotation(int dim, Rng& rng);
/// Rows of Rz(theta) act as x -> x Rz with Rz = [[c, s, 0], [-s, c, 0], [0, 0, 1]].
Mat rotation_z(double theta);
Mat rotation_x(double theta);

/// Orthogonal matrix whose first row is the unit vector v (a Householder
/// reflection, up to sign).
Mat frame_from(const Vec& v);

/// The unimodular lattice p^{-1/d} T k, reduced through T's integer LLL.

LatticeBasis hecke_lattice(const Mat& hecke_element, std::uint64_t p, const Mat& rotation);
LatticeBasis hecke_lattice(const HeckeSet& set, std::uint64_t index, const Mat& rotation);

/// The m^d points x0 + j/m (mod 1), j in {0..m-1}^d, in lexicographic order.
std::vector<Vec> torus_points(int dim, int m, const Vec& x0);

/// Draws unimodular lattices p^{-1/n} T k with T uniform in the Hecke set
/// and k a fresh Haar rotation; for large p these equidistribute in the
/// space of unimodular lattices.
class HeckeSampler {
public:
    HeckeSampler(int dim, std::uint64_t p = 10007);

    [[nodiscard]] int dim() const noexcept { return set_.dim(); }
    [[nodiscard]] std::uint64_t prime() const noexcept { return set_.prime(); }
    [[nodiscard]] LatticeBasis sample(Rng& rng) const;

private:
    HeckeSet set_;
};

}  // namespace lorentz
