#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lorentz/error.hpp"

namespace lorentz {

inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxDim, kMaxDim>;

inline constexpr double kDefaultCellBudget = 1e8;

/// Closed axis-aligned box; empty when lo > hi in some coordinate.
struct Box {
    Vec lo;
    Vec hi;
    [[nodiscard]] bool empty() const { return (lo.array() > hi.array()).any(); }
};

/// Reduce the rows of `basis` with LLL (Lovasz constant `delta`). Integer
/// row operations only, so an integral input stays exactly integral. When
/// `transform` is given it receives the unimodular U with U * basis = result.
Mat lll_reduce(const Mat& basis, double delta = 0.99, Mat* transform = nullptr);

/// Affine lattice { c * B + shift : c in Z^d } with B's rows as generators.
/// An LLL-reduced copy of the basis and its inverse are computed once at
/// construction; all enumeration goes through them.
class LatticeBasis {
public:
    explicit LatticeBasis(Mat basis);
    LatticeBasis(Mat basis, Vec shift);

    /// Trust `reduced` as an already reduced basis of the same lattice
    /// (checked through the covolume only).
    static LatticeBasis from_reduced(Mat basis, Mat reduced);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(basis_.rows()); }
    [[nodiscard]] const Mat& basis() const noexcept { return basis_; }
    [[nodiscard]] const Mat& reduced() const noexcept { return reduced_; }
    [[nodiscard]] const Mat& reduced_inverse() const noexcept { return reduced_inv_; }
    [[nodiscard]] const Vec& shift() const noexcept { return shift_; }
    [[nodiscard]] bool has_shift() const noexcept { return shift_.cwiseAbs().maxCoeff() > 0.0; }
    [[nodiscard]] double covolume() const noexcept { return covolume_; }
    /// Inverse of basis(); for very skewed bases prefer reduced_inverse().
    [[nodiscard]] Mat inverse() const { return basis_.inverse(); }

    /// Same lattice, new translation (keeps the reduction).
    [[nodiscard]] LatticeBasis with_shift(const Vec& shift) const;
    /// Every point (and the translation) multiplied by `factor`.
    [[nodiscard]] LatticeBasis scaled(double factor) const;
    [[nodiscard]] Vec point(std::span<const std::int64_t> coeffs) const;

private:
    LatticeBasis() = default;
    void finish();

    Mat basis_;
    Mat reduced_;
    Mat reduced_inv_;
    Vec shift_;
    double covolume_ = 0.0;
};

/// A bounded open set with a membership test and an enclosing box.
template <class R>
concept Region = requires(const R& r, std::span<const double> x) {
    { r.dim() } -> std::convertible_to<int>;
    { r.contains(x) } -> std::convertible_to<bool>;
    { r.bounding_box() } -> std::convertible_to<Box>;
};

/// { x : lo1 < x1 < hi1, |x_perp - center| < radius }, center in R^{d-1}.
struct Cylinder {
    double x1_lo = 0.0;
    double x1_hi = 1.0;
    double radius = 1.0;
    Vec center;

    Cylinder(double lo, double hi, double r, Vec c);
    [[nodiscard]] int dim() const { return static_cast<int>(center.size()) + 1; }
    [[nodiscard]] bool contains(std::span<const double> x) const;
    [[nodiscard]] Box bounding_box() const;
};

struct Ball {
    Vec center;
    double radius = 1.0;

    [[nodiscard]] int dim() const { return static_cast<int>(center.size()); }
    [[nodiscard]] bool contains(std::span<const double> x) const;
    [[nodiscard]] Box bounding_box() const;
};

struct OpenBox {
    Box box;

    [[nodiscard]] int dim() const { return static_cast<int>(box.lo.size()); }
    [[nodiscard]] bool contains(std::span<const double> x) const;
    [[nodiscard]] Box bounding_box() const { return box; }
};

/// Paraboloid { u : u1 > u2^2 + ... + un^2 - 1 } translated by -y and cut
/// by the half-space h.x < 0, i.e. { x : x + y in paraboloid, h.x < 0 }.
struct CutParaboloid {
    Vec y;
    Vec h;

    CutParaboloid(Vec y, Vec h);
    [[nodiscard]] int dim() const { return static_cast<int>(y.size()); }
    [[nodiscard]] bool contains(std::span<const double> x) const;
    [[nodiscard]] Box bounding_box() const;
    /// Exact area for n = 2; throws DomainError for other dimensions.
    [[nodiscard]] double area_2d() const;
};

/// u1 > u2^2 + ... + un^2 - 1.
bool in_paraboloid(std::span<const double> u);

template <Region A, Region B>
struct RegionUnion {
    A first;
    B second;

    [[nodiscard]] int dim() const { return first.dim(); }
    [[nodiscard]] bool contains(std::span<const double> x) const {
        return first.contains(x) || second.contains(x);
    }
    [[nodiscard]] Box bounding_box() const {
        Box a = first.bounding_box();
        Box b = second.bounding_box();
        if (a.empty()) return b;
        if (b.empty()) return a;
        return {a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi)};
    }
};

namespace detail {

/// Coefficient ranges [lo_i, hi_i] covering `box` with respect to the
/// reduced basis; returns the number of cells (infinite if it overflows).
inline double coefficient_box(const LatticeBasis& lattice, const Box& box, std::int64_t* lo, std::int64_t* hi) {
    const int d = lattice.dim();
    const Mat& inv = lattice.reduced_inverse();
    const Vec& s = lattice.shift();
    double cells = 1.0;
    for (int i = 0; i < d; ++i) {
        double cmin = 0.0;
        double cmax = 0.0;
        for (int j = 0; j < d; ++j) {
            const double a = (box.lo[j] - s[j]) * inv(j, i);
            const double b = (box.hi[j] - s[j]) * inv(j, i);
            cmin += std::min(a, b);
            cmax += std::max(a, b);
        }
        const double fl = std::floor(cmin - 1e-9);
        const double ce = std::ceil(cmax + 1e-9);
        cells *= (ce - fl + 1.0);
        if (!(cells < 9e18)) return std::numeric_limits<double>::infinity();
        lo[i] = static_cast<std::int64_t>(fl);
        hi[i] = static_cast<std::int64_t>(ce);
    }
    return cells;
}

/// Visit points of `lattice` inside `box` (closed), outer coefficients
/// bounded through the reduced inverse and the innermost one solved exactly
/// from the box constraints. `visit(x)` returns false to stop early.
/// Returns false iff stopped early.
template <class Visit>
bool scan_box(const LatticeBasis& lattice, const Box& box, double budget, Visit&& visit) {
    const int d = lattice.dim();
    if (box.empty()) return true;
    const Mat& red = lattice.reduced();
    const Vec& s = lattice.shift();

    std::int64_t lo[kMaxDim];
    std::int64_t hi[kMaxDim];
    if (coefficient_box(lattice, box, lo, hi) > budget) throw BudgetError("lattice enumeration exceeds cell budget");

    const int inner = d - 1;
    double base[kMaxDim];
    double x[kMaxDim];
    std::int64_t c[kMaxDim];
    for (int i = 0; i < inner; ++i) c[i] = lo[i];
    const std::span<const double> view(x, static_cast<std::size_t>(d));

    for (;;) {
        for (int j = 0; j < d; ++j) {
            double v = s[j];
            for (int i = 0; i < inner; ++i) v += static_cast<double>(c[i]) * red(i, j);
            base[j] = v;
        }
        double tlo = static_cast<double>(lo[inner]);
        double thi = static_cast<double>(hi[inner]);
        bool feasible = true;
        for (int j = 0; j < d && feasible; ++j) {
            const double r = red(inner, j);
            if (std::abs(r) < 1e-300) {
                if (base[j] < box.lo[j] || base[j] > box.hi[j]) feasible = false;
                continue;
            }
            double a = (box.lo[j] - base[j]) / r;
            double b = (box.hi[j] - base[j]) / r;
            if (a > b) std::swap(a, b);
            tlo = std::max(tlo, a);
            thi = std::min(thi, b);
            if (tlo > thi + 1e-9) feasible = false;
        }
        if (feasible) {
            const auto t0 = static_cast<std::int64_t>(std::floor(tlo - 1e-9));
            const auto t1 = static_cast<std::int64_t>(std::ceil(thi + 1e-9));
            for (std::int64_t t = t0; t <= t1; ++t) {
                const auto td = static_cast<double>(t);
                for (int j = 0; j < d; ++j) x[j] = base[j] + td * red(inner, j);
                if (!visit(view)) return false;
            }
        }
        int k = inner - 1;
        while (k >= 0 && c[k] == hi[k]) {
            c[k] = lo[k];
            --k;
        }
        if (k < 0) return true;
        ++c[k];
    }
}

}  // namespace detail

/// Call `visit(x)` for each lattice point in `region`; stop when it
/// returns false. Returns false iff stopped early.
template <Region R, class Visit>
bool for_each_point(const LatticeBasis& lattice, const R& region, Visit&& visit,
                    double budget = kDefaultCellBudget) {
    if (region.dim() != lattice.dim()) throw DomainError("region and lattice dimensions differ");
    return detail::scan_box(lattice, region.bounding_box(), budget, [&](std::span<const double> x) {
        return region.contains(x) ? static_cast<bool>(visit(x)) : true;
    });
}

template <Region R>
std::vector<Vec> enumerate_points(const LatticeBasis& lattice, const R& region,
                                  double budget = kDefaultCellBudget) {
    std::vector<Vec> out;
    for_each_point(
        lattice, region,
        [&](std::span<const double> x) {
            out.emplace_back(Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())));
            return true;
        },
        budget);
    return out;
}

namespace detail {

/// Like scan_box, but a large box is cut in three along its most
/// profitable axis and the middle third searched first, so a hit deep
/// inside a huge region is found without paying for the whole box.
/// `budget` is drawn down by each scanned piece.
template <class Visit>
bool search_box(const LatticeBasis& lattice, const Box& box, double& budget, Visit& visit) {
    constexpr double kLeafCells = 4096.0;
    if (box.empty()) return true;
    std::int64_t lo[kMaxDim];
    std::int64_t hi[kMaxDim];
    const double cells = coefficient_box(lattice, box, lo, hi);
    // Cutting one axis leaves the total cell count roughly unchanged unless
    // that axis is already only a few cells wide; skip such axes.
    int axis = -1;
    double best = 1.5 * cells;
    if (cells > kLeafCells) {
        for (int j = 0; j < lattice.dim(); ++j) {
            Box middle{box.lo, box.hi};
            const double w = (box.hi[j] - box.lo[j]) / 3.0;
            middle.lo[j] += w;
            middle.hi[j] -= w;
            const double c = 3.0 * coefficient_box(lattice, middle, lo, hi);
            if (c < best) {
                best = c;
                axis = j;
            }
        }
    }
    if (axis < 0 && !std::isfinite(cells)) {
        // Too large to even count: cut the longest side.
        double widest = -1.0;
        for (int j = 0; j < lattice.dim(); ++j) {
            if (box.hi[j] - box.lo[j] > widest) {
                widest = box.hi[j] - box.lo[j];
                axis = j;
            }
        }
    }
    if (axis < 0) {
        if (cells > budget) throw BudgetError("lattice enumeration exceeds cell budget");
        budget -= cells;
        return scan_box(lattice, box, cells + 1.0, visit);
    }
    const double w = (box.hi[axis] - box.lo[axis]) / 3.0;
    for (int piece : {1, 0, 2}) {
        Box part{box.lo, box.hi};
        part.lo[axis] = box.lo[axis] + w * piece;
        part.hi[axis] = piece == 2 ? box.hi[axis] : box.lo[axis] + w * (piece + 1);
        if (!search_box(lattice, part, budget, visit)) return false;
    }
    return true;
}

}  // namespace detail

template <Region R>
bool is_disjoint(const LatticeBasis& lattice, const R& region, double budget = kDefaultCellBudget) {
    if (region.dim() != lattice.dim()) throw DomainError("region and lattice dimensions differ");
    auto visit = [&](std::span<const double> x) { return !region.contains(x); };
    return detail::search_box(lattice, region.bounding_box(), budget, visit);
}

/// The joint bounding box of two far-apart regions is mostly empty, so
/// test each part on its own.
template <Region A, Region B>
bool is_disjoint(const LatticeBasis& lattice, const RegionUnion<A, B>& region, double budget = kDefaultCellBudget) {
    return is_disjoint(lattice, region.first, budget) && is_disjoint(lattice, region.second, budget);
}

/// Smallest x1 over lattice points with 0 < x1 < cap and |x_perp - center| < radius,
/// or nullopt when there is none (the free path is at least `cap`).
std::optional<double> free_path_alpha(const LatticeBasis& lattice, const Vec& center, double radius,
                                      double cap, double budget = kDefaultCellBudget);

}  // namespace lorentz
