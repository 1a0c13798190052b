#pragma once

#include <random>

#include "doctest.h"
#include "slowfast/core.hpp"

namespace sftest {

using slowfast::Mat;
using slowfast::Vec;

inline Vec vec(std::initializer_list<double> xs)
{
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// Scalar slow-fast system u' = F(u, v), v' = eps G(u, v).
inline slowfast::SlowFastSystem scalar_system(std::function<double(double, double)> f,
                                              std::function<double(double, double)> g,
                                              std::function<double(double, double)> fu = {},
                                              std::function<double(double, double)> fv = {})
{
    slowfast::SystemDefinition d;
    d.name = "scalar";
    d.n_fast = 1;
    d.m_slow = 1;
    d.p_params = 0;
    d.rhs_fast = [f](const Vec& u, const Vec& v, const Vec&, double) { return vec({f(u[0], v[0])}); };
    d.rhs_slow = [g](const Vec& u, const Vec& v, const Vec&, double) { return vec({g(u[0], v[0])}); };
    if (fu) d.jac_u = [fu](const Vec& u, const Vec& v, const Vec&, double) { return Mat::Constant(1, 1, fu(u[0], v[0])); };
    if (fv) d.jac_v = [fv](const Vec& u, const Vec& v, const Vec&, double) { return Mat::Constant(1, 1, fv(u[0], v[0])); };
    return slowfast::SlowFastSystem(std::move(d));
}

// u' = A u + B v, v' = eps c.
inline slowfast::SlowFastSystem linear_system(const Mat& a, const Mat& b, const Vec& c, bool analytic = true)
{
    slowfast::SystemDefinition d;
    d.name = "linear";
    d.n_fast = static_cast<int>(a.rows());
    d.m_slow = static_cast<int>(b.cols());
    d.p_params = 0;
    d.rhs_fast = [a, b](const Vec& u, const Vec& v, const Vec&, double) -> Vec { return a * u + b * v; };
    d.rhs_slow = [c](const Vec&, const Vec&, const Vec&, double) -> Vec { return c; };
    if (analytic) {
        d.jac_u = [a](const Vec&, const Vec&, const Vec&, double) -> Mat { return a; };
        d.jac_v = [b](const Vec&, const Vec&, const Vec&, double) -> Mat { return b; };
    }
    d.linear_part = a;
    return slowfast::SlowFastSystem(std::move(d));
}

inline double max_abs(const Vec& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace sftest
