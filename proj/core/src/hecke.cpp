#include "lorentz/hecke.hpp"

#include <cmath>
#include <string>

#include "lorentz/error.hpp"

namespace lorentz {
namespace {

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    while (e) {
        if (e & 1) r = mul_mod(r, a, m);
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    return r;
}

void check_orthogonal(const Mat& k) {
    const Mat err = k * k.transpose() - Mat::Identity(k.rows(), k.rows());
    if (!(err.cwiseAbs().maxCoeff() < 1e-12)) throw DomainError("rotation is not orthogonal to 1e-12");
}

}  // namespace

bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

HeckeSet::HeckeSet(int dim, std::uint64_t p) : dim_(dim), p_(p) {
    if (dim != 2 && dim != 3) throw DomainError("Hecke sets are available for d = 2 and d = 3");
    if (!is_prime(p)) throw DomainError("Hecke parameter p = " + std::to_string(p) + " is not prime");
    if (p > (1ULL << 31)) throw DomainError("Hecke parameter p must be below 2^31");
}

std::uint64_t HeckeSet::size() const noexcept { return dim_ == 2 ? p_ + 1 : 1 + p_ + p_ * p_; }

Mat HeckeSet::element(std::uint64_t index) const {
    if (index >= size()) throw DomainError("Hecke index out of range");
    const auto p = static_cast<double>(p_);
    Mat t = Mat::Identity(dim_, dim_);
    if (index == 0) {
        t(0, 0) = p;
        return t;
    }
    if (index <= p_) {
        t(0, 1) = static_cast<double>(index - 1);
        t(1, 1) = p;
        return t;
    }
    const std::uint64_t rest = index - 1 - p_;
    t(0, 2) = static_cast<double>(rest / p_);
    t(1, 2) = static_cast<double>(rest % p_);
    t(2, 2) = p;
    return t;
}

Mat HeckeSet::reduced_element(std::uint64_t index) const { return lll_reduce(element(index)); }

std::vector<Mat> hecke_enumerate(int dim, std::uint64_t p) {
    const HeckeSet set(dim, p);
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(set.size()));
    for (std::uint64_t i = 0; i < set.size(); ++i) out.push_back(set.element(i));
    return out;
}

Mat rotation_z(double theta) {
    Mat r = Mat::Identity(3, 3);
    r(0, 0) = std::cos(theta);
    r(0, 1) = std::sin(theta);
    r(1, 0) = -std::sin(theta);
    r(1, 1) = std::cos(theta);
    return r;
}

Mat rotation_x(double theta) {
    Mat r = Mat::Identity(3, 3);
    r(1, 1) = std::cos(theta);
    r(1, 2) = std::sin(theta);
    r(2, 1) = -std::sin(theta);
    r(2, 2) = std::cos(theta);
    return r;
}

Mat random_rotation(int dim, Rng& rng) {
    Mat k(dim, dim);
    if (dim == 2) {
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        k << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
        return k;
    }
    if (dim == 3) {
        double q[4];
        double n2 = 0.0;
        while (n2 < 1e-12) {
            n2 = 0.0;
            for (double& c : q) {
                c = rng.normal();
                n2 += c * c;
            }
        }
        const double n = std::sqrt(n2);
        const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
        k << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
            2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
        return k;
    }
    if (dim == 4) {
        Mat g(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) g(i, j) = rng.normal();
        Eigen::HouseholderQR<Mat> qr(g);
        Mat q = qr.householderQ();
        const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int j = 0; j < 4; ++j)
            if (r(j, j) < 0) q.col(j) = -q.col(j);
        if (q.determinant() < 0) q.col(0) = -q.col(0);
        return q;
    }
    if (dim == 1) return Mat::Identity(1, 1);
    throw DomainError("random rotation needs dimension 1..4");
}

Mat RotationParams::matrix(int dim) const {
    Mat k;
    switch (kind) {
        case Kind::identity:
        case Kind::per_sample:
            k = Mat::Identity(dim, dim);
            break;
        case Kind::fixed:
            if (dim == 3) {
                k = rotation_z(0.5) * rotation_x(1.0) * rotation_z(1.5);
            } else if (dim == 2) {
                k = Mat(2, 2);
                k << std::cos(1.0), std::sin(1.0), -std::sin(1.0), std::cos(1.0);
            } else {
                k = Mat::Identity(dim, dim);
            }
            break;
        case Kind::random: {
            Rng rng(seed, 0x726f74ULL);
            k = random_rotation(dim, rng);
            break;
        }
    }
    check_orthogonal(k);
    return k;
}

LatticeBasis hecke_lattice(const Mat& t, std::uint64_t p, const Mat& rotation) {
    const int d = static_cast<int>(t.rows());
    if (!is_prime(p)) throw DomainError("Hecke parameter p = " + std::to_string(p) + " is not prime");
    if (t.cols() != d || rotation.rows() != d || rotation.cols() != d)
        throw DomainError("Hecke element and rotation shapes differ");
    if ((t.array() - t.array().round()).abs().maxCoeff() > 0.0) throw DomainError("Hecke element must be integral");
    if (std::abs(std::abs(t.determinant()) - static_cast<double>(p)) > 1e-6 * static_cast<double>(p))
        throw DomainError("Hecke element must have determinant p");
    check_orthogonal(rotation);
    const double scale = std::pow(static_cast<double>(p), -1.0 / d);
    const Mat reduced = lll_reduce(t);
    return LatticeBasis::from_reduced(scale * t * rotation, scale * reduced * rotation);
}

LatticeBasis hecke_lattice(const HeckeSet& set, std::uint64_t index, const Mat& rotation) {
    return hecke_lattice(set.element(index), set.prime(), rotation);
}

std::vector<Vec> torus_points(int dim, int m, const Vec& x0) {
    if (dim < 1 || dim > kMaxDim) throw DomainError("torus dimension must be 1..4");
    if (m < 1) throw DomainError("torus grid size m must be at least 1");
    if (x0.size() != dim) throw DomainError("torus offset has wrong dimension");
    std::size_t count = 1;
    for (int i = 0; i < dim; ++i) count *= static_cast<std::size_t>(m);
    std::vector<Vec> out;
    out.reserve(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Vec x(dim);
        std::size_t rem = idx;
        for (int i = dim - 1; i >= 0; --i) {
            const auto j = static_cast<double>(rem % static_cast<std::size_t>(m));
            rem /= static_cast<std::size_t>(m);
            const double v = x0[i] + j / m;
            x[i] = v - std::floor(v);
        }
        out.push_back(x);
    }
    return out;
}

HeckeSampler::HeckeSampler(int dim, std::uint64_t p) : set_(dim, p) {}

LatticeBasis HeckeSampler::sample(Rng& rng) const {
    const std::uint64_t index = rng.below(set_.size());
    const Mat k = random_rotation(set_.dim(), rng);
    return hecke_lattice(set_, index, k);
}

Mat frame_from(const Vec& v) {
    const auto d = static_cast<int>(v.size());
    Vec w = v;
    double sign = 1.0;
    if (v[0] > 0.0) {
        w[0] += 1.0;
        sign = -1.0;
    } else {
        w[0] -= 1.0;
    }
    const double ww = w.squaredNorm();
    Mat h = Mat::Identity(d, d);
    if (ww > 0.0) h -= (2.0 / ww) * w * w.transpose();
    return sign * h;
}

}  // namespace lorentz
