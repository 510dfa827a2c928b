#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "lorentz/lattice.hpp"
#include "lorentz/rng.hpp"

namespace testing {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kZeta2 = kPi * kPi / 6.0;
inline constexpr double kZeta3 = 1.2020569031595942854;

// Random real basis of determinant one: a product of elementary shears
// and a diagonal scaling, so it is neither orthogonal nor reduced.
inline lorentz::Mat random_unimodular(int d, lorentz::Rng& rng, double skew = 1.5) {
    lorentz::Mat m = lorentz::Mat::Identity(d, d);
    for (int k = 0; k < 3 * d; ++k) {
        const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
        int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(d - 1)));
        if (j >= i) ++j;
        m.row(i) += rng.uniform(-skew, skew) * m.row(j);
    }
    lorentz::Mat scale = lorentz::Mat::Identity(d, d);
    double prod = 1.0;
    for (int i = 0; i + 1 < d; ++i) {
        scale(i, i) = std::exp(rng.uniform(-0.5, 0.5));
        prod *= scale(i, i);
    }
    scale(d - 1, d - 1) = 1.0 / prod;
    return scale * m;
}

// Every point of the lattice whose coefficients lie in the box spanned by
// mapping `box` through the raw (unreduced) basis inverse, widened by `pad`.
template <class Region>
std::vector<lorentz::Vec> brute_points(const lorentz::Mat& basis, const lorentz::Vec& shift, const Region& region,
                                       int pad = 2) {
    const int d = static_cast<int>(basis.rows());
    const lorentz::Box box = region.bounding_box();
    const lorentz::Mat inv = basis.inverse();
    std::vector<long> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j < d; ++j) {
            const double u = (box.lo[j] - shift[j]) * inv(j, i);
            const double v = (box.hi[j] - shift[j]) * inv(j, i);
            a += std::min(u, v);
            b += std::max(u, v);
        }
        lo[i] = static_cast<long>(std::floor(a)) - pad;
        hi[i] = static_cast<long>(std::ceil(b)) + pad;
    }
    std::vector<lorentz::Vec> out;
    std::vector<long> c(lo);
    for (;;) {
        lorentz::Vec x = shift;
        for (int i = 0; i < d; ++i) x += static_cast<double>(c[i]) * basis.row(i).transpose();
        if (region.contains(std::span<const double>(x.data(), static_cast<std::size_t>(d)))) out.push_back(x);
        int k = 0;
        while (k < d && ++c[k] > hi[k]) c[k] = lo[k], ++k;
        if (k == d) break;
    }
    return out;
}

inline void sort_points(std::vector<lorentz::Vec>& pts) {
    std::sort(pts.begin(), pts.end(), [](const lorentz::Vec& a, const lorentz::Vec& b) {
        for (int i = 0; i < a.size(); ++i)
            if (std::abs(a[i] - b[i]) > 1e-9) return a[i] < b[i];
        return false;
    });
}

inline bool same_points(std::vector<lorentz::Vec> a, std::vector<lorentz::Vec> b) {
    if (a.size() != b.size()) return false;
    sort_points(a);
    sort_points(b);
    for (std::size_t i = 0; i < a.size(); ++i)
        if ((a[i] - b[i]).cwiseAbs().maxCoeff() > 1e-9) return false;
    return true;
}

// Sets LORENTZ_THREADS for the lifetime of the object.
class ThreadCap {
public:
    explicit ThreadCap(int n) {
        if (const char* old = std::getenv("LORENTZ_THREADS")) old_ = old, had_ = true;
        setenv("LORENTZ_THREADS", std::to_string(n).c_str(), 1);
    }
    ~ThreadCap() {
        if (had_) setenv("LORENTZ_THREADS", old_.c_str(), 1);
        else unsetenv("LORENTZ_THREADS");
    }
    ThreadCap(const ThreadCap&) = delete;
    ThreadCap& operator=(const ThreadCap&) = delete;

private:
    std::string old_;
    bool had_ = false;
};

}  // namespace testing
