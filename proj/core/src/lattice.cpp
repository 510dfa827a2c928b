#include "lorentz/lattice.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "lorentz/error.hpp"
#include "lorentz/special.hpp"

namespace lorentz {
namespace {

void gram_schmidt(const Mat& b, Mat& mu, Vec& norms) {
    const int n = static_cast<int>(b.rows());
    Mat star = b;
    mu = Mat::Zero(n, n);
    norms = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            mu(i, j) = b.row(i).dot(star.row(j)) / norms[j];
            star.row(i) -= mu(i, j) * star.row(j);
        }
        norms[i] = star.row(i).squaredNorm();
    }
}

/// Open window of the tube whose lower end is closed when `closed_lo`.
struct TubeWindow {
    double lo;
    double hi;
    bool closed_lo;
    double radius_sq;
    const Vec* center;

    [[nodiscard]] bool contains(std::span<const double> x) const {
        if (x[0] >= hi || x[0] < lo || (!closed_lo && x[0] == lo)) return false;
        double r2 = 0.0;
        for (std::size_t j = 1; j < x.size(); ++j) {
            const double t = x[j] - (*center)[static_cast<Eigen::Index>(j) - 1];
            r2 += t * t;
        }
        return r2 < radius_sq;
    }
};

}  // namespace

Mat lll_reduce(const Mat& basis, double delta, Mat* transform) {
    const int n = static_cast<int>(basis.rows());
    Mat b = basis;
    Mat u = Mat::Identity(n, n);
    Mat mu;
    Vec norms;
    gram_schmidt(b, mu, norms);
    int k = 1;
    long guard = 0;
    while (k < n) {
        if (++guard > 100000) throw ConvergenceError("LLL reduction did not terminate");
        for (int j = k - 1; j >= 0; --j) {
            const double q = std::nearbyint(mu(k, j));
            if (q != 0.0) {
                b.row(k) -= q * b.row(j);
                u.row(k) -= q * u.row(j);
                for (int i = 0; i < j; ++i) mu(k, i) -= q * mu(j, i);
                mu(k, j) -= q;
            }
        }
        if (norms[k] >= (delta - mu(k, k - 1) * mu(k, k - 1)) * norms[k - 1]) {
            ++k;
        } else {
            b.row(k).swap(b.row(k - 1));
            u.row(k).swap(u.row(k - 1));
            gram_schmidt(b, mu, norms);
            k = std::max(k - 1, 1);
        }
    }
    if (transform) *transform = u;
    return b;
}

LatticeBasis::LatticeBasis(Mat basis) : LatticeBasis(basis, Vec::Zero(basis.rows())) {}

LatticeBasis::LatticeBasis(Mat basis, Vec shift) : basis_(std::move(basis)), shift_(std::move(shift)) {
    if (basis_.rows() < 1 || basis_.rows() > kMaxDim || basis_.rows() != basis_.cols())
        throw DomainError("lattice basis must be square with dimension 1..4");
    if (shift_.size() != basis_.rows()) throw DomainError("shift dimension does not match basis");
    if (!basis_.allFinite() || !shift_.allFinite()) throw DomainError("lattice basis is not finite");
    reduced_ = lll_reduce(basis_);
    finish();
}

LatticeBasis LatticeBasis::from_reduced(Mat basis, Mat reduced) {
    LatticeBasis out;
    out.basis_ = std::move(basis);
    out.reduced_ = std::move(reduced);
    out.shift_ = Vec::Zero(out.basis_.rows());
    if (out.reduced_.rows() != out.basis_.rows() || out.reduced_.cols() != out.basis_.cols())
        throw DomainError("reduced basis shape mismatch");
    out.finish();
    const double raw = std::abs(out.basis_.determinant());
    // Loose on purpose: very skewed raw bases lose digits in their determinant.
    if (!(std::abs(raw - out.covolume_) <= 1e-4 * out.covolume_))
        throw DomainError("reduced basis does not span a lattice of the same covolume");
    return out;
}

void LatticeBasis::finish() {
    covolume_ = std::abs(reduced_.determinant());
    if (!(covolume_ > 0.0) || !std::isfinite(covolume_)) throw DomainError("lattice basis is singular");
    reduced_inv_ = reduced_.inverse();
    const Mat check = reduced_ * reduced_inv_ - Mat::Identity(dim(), dim());
    if (!(check.cwiseAbs().maxCoeff() < 1e-9)) throw DomainError("lattice basis is numerically singular");
}

LatticeBasis LatticeBasis::with_shift(const Vec& shift) const {
    if (shift.size() != dim()) throw DomainError("shift dimension does not match basis");
    LatticeBasis out = *this;
    out.shift_ = shift;
    return out;
}

LatticeBasis LatticeBasis::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("scale factor must be positive");
    LatticeBasis out = *this;
    out.basis_ *= factor;
    out.reduced_ *= factor;
    out.reduced_inv_ /= factor;
    out.shift_ *= factor;
    out.covolume_ *= std::pow(factor, dim());
    return out;
}

Vec LatticeBasis::point(std::span<const std::int64_t> coeffs) const {
    if (static_cast<int>(coeffs.size()) != dim()) throw DomainError("coefficient vector has wrong length");
    Vec x = shift_;
    for (int i = 0; i < dim(); ++i) x += static_cast<double>(coeffs[static_cast<std::size_t>(i)]) * basis_.row(i).transpose();
    return x;
}

Cylinder::Cylinder(double lo, double hi, double r, Vec c) : x1_lo(lo), x1_hi(hi), radius(r), center(std::move(c)) {
    if (!(hi > lo)) throw DomainError("cylinder needs x1_lo < x1_hi");
    if (!(r > 0.0)) throw DomainError("cylinder radius must be positive");
    if (center.size() < 1 || center.size() > kMaxDim - 1) throw DomainError("cylinder dimension must be 2..4");
}

bool Cylinder::contains(std::span<const double> x) const {
    if (!(x[0] > x1_lo && x[0] < x1_hi)) return false;
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < center.size(); ++j) {
        const double t = x[static_cast<std::size_t>(j) + 1] - center[j];
        r2 += t * t;
    }
    return r2 < radius * radius;
}

Box Cylinder::bounding_box() const {
    const int d = dim();
    Box b{Vec(d), Vec(d)};
    b.lo[0] = x1_lo;
    b.hi[0] = x1_hi;
    for (int j = 1; j < d; ++j) {
        b.lo[j] = center[j - 1] - radius;
        b.hi[j] = center[j - 1] + radius;
    }
    return b;
}

bool Ball::contains(std::span<const double> x) const {
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < center.size(); ++j) {
        const double t = x[static_cast<std::size_t>(j)] - center[j];
        r2 += t * t;
    }
    return r2 < radius * radius;
}

Box Ball::bounding_box() const {
    return {center.array() - radius, center.array() + radius};
}

bool OpenBox::contains(std::span<const double> x) const {
    for (Eigen::Index j = 0; j < box.lo.size(); ++j) {
        const double v = x[static_cast<std::size_t>(j)];
        if (!(v > box.lo[j] && v < box.hi[j])) return false;
    }
    return true;
}

bool in_paraboloid(std::span<const double> u) {
    double s = 0.0;
    for (std::size_t j = 1; j < u.size(); ++j) s += u[j] * u[j];
    return u[0] > s - 1.0;
}

CutParaboloid::CutParaboloid(Vec y_, Vec h_) : y(std::move(y_)), h(std::move(h_)) {
    if (y.size() < 1 || y.size() > kMaxDim || h.size() != y.size())
        throw DomainError("cut paraboloid needs matching y and h of dimension 1..4");
    if (!(h[0] > 0.0)) throw DomainError("cut paraboloid needs h1 > 0");
}

bool CutParaboloid::contains(std::span<const double> x) const {
    const Eigen::Index n = y.size();
    double dot = 0.0;
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double xj = x[static_cast<std::size_t>(j)];
        dot += h[j] * xj;
        if (j > 0) {
            const double u = xj + y[j];
            s += u * u;
        }
    }
    return dot < 0.0 && x[0] + y[0] > s - 1.0;
}

Box CutParaboloid::bounding_box() const {
    // With u = x + y the region forces |u' + h'/(2 h1)|^2 < R^2 where
    // R^2 = 1 + y1 + h'.y'/h1 + |h'|^2/(4 h1^2), primes dropping coordinate 1.
    const int n = dim();
    Box b{Vec(n), Vec(n)};
    const double h1 = h[0];
    double hy = 0.0;
    double hh = 0.0;
    for (int j = 1; j < n; ++j) {
        hy += h[j] * y[j];
        hh += h[j] * h[j];
    }
    const double r2 = 1.0 + y[0] + hy / h1 + hh / (4.0 * h1 * h1);
    if (!(r2 > 0.0)) {
        b.lo.setOnes();
        b.hi.setZero();
        return b;
    }
    const double r = std::sqrt(r2);
    for (int j = 1; j < n; ++j) {
        const double c = -h[j] / (2.0 * h1) - y[j];
        b.lo[j] = c - r;
        b.hi[j] = c + r;
    }
    b.lo[0] = -1.0 - y[0];
    b.hi[0] = (hy + hh / (2.0 * h1) + std::sqrt(hh) * r) / h1;
    if (n == 1) b.hi[0] = 0.0;
    return b;
}

double CutParaboloid::area_2d() const {
    if (dim() != 2) throw DomainError("area_2d needs a planar region");
    // Between x1 = (x2 + y2)^2 - 1 - y1 and x1 = s x2, s = -h2/h1.
    const double s = -h[1] / h[0];
    const double disc = (s - 2.0 * y[1]) * (s - 2.0 * y[1]) + 4.0 * (1.0 + y[0] - y[1] * y[1]);
    return disc > 0.0 ? std::pow(disc, 1.5) / 6.0 : 0.0;
}

std::optional<double> free_path_alpha(const LatticeBasis& lattice, const Vec& center, double radius,
                                      double cap, double budget) {
    const int d = lattice.dim();
    if (d < 2) throw DomainError("free path needs dimension at least 2");
    if (center.size() != d - 1) throw DomainError("tube centre must have dimension d-1");
    if (!(radius > 0.0)) throw DomainError("tube radius must be positive");
    if (!(cap > 0.0)) throw DomainError("free path cap must be positive");

    // Windows sized so each holds about one point on average, doubling
    // until one contains a point; its minimum is then the global minimum.
    double width = lattice.covolume() / (v_ball(d - 1) * std::pow(radius, d - 1));
    double lo = 0.0;
    Box box{Vec(d), Vec(d)};
    for (int j = 1; j < d; ++j) {
        box.lo[j] = center[j - 1] - radius;
        box.hi[j] = center[j - 1] + radius;
    }
    while (lo < cap) {
        const double hi = std::min(cap, lo + width);
        const TubeWindow window{lo, hi, lo > 0.0, radius * radius, &center};
        box.lo[0] = lo;
        box.hi[0] = hi;
        double best = hi;
        bool found = false;
        detail::scan_box(lattice, box, budget, [&](std::span<const double> x) {
            if (window.contains(x) && x[0] < best) {
                best = x[0];
                found = true;
            }
            return true;
        });
        if (found) return best;
        lo = hi;
        width *= 2.0;
    }
    return std::nullopt;
}

}  // namespace lorentz
