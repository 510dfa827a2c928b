#include "lorentz/special.hpp"

#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <numbers>

#include "lorentz/error.hpp"

namespace lorentz {

double zeta(int s) {
    if (s < 2) throw DomainError("zeta is only needed at integers s >= 2");
    return boost::math::zeta(static_cast<double>(s));
}

double v_ball(int n) {
    if (n < 0) throw DomainError("ball dimension must be non-negative");
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

}  // namespace lorentz
