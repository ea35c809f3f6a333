#ifndef CRANE_TEST_UTIL_HPP
#define CRANE_TEST_UTIL_HPP

#include <cmath>
#include <random>
#include <vector>

#include "crane/discretize.hpp"

namespace crane::testing {

/// Gaussian nodal values; with `compatible` the boundary slots are tied together.
inline CraneState random_state(const DiscreteOperator& op, std::mt19937_64& rng, bool compatible)
{
    std::normal_distribution<double> nd;
    auto s = op.zeros();
    for (auto* v : {&s.y, &s.z, &s.u})
        for (Eigen::Index i = 0; i < v->size(); ++i)
            (*v)(i) = nd(rng);
    s.xi = nd(rng);
    s.eta = nd(rng);
    if (compatible) {
        s.z(0) = s.u(0) = s.xi;
        s.z(s.z.size() - 1) = s.eta;
    }
    return s;
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace crane::testing

#endif
