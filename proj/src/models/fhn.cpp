#include <cmath>
#include <vector>

#include "builders.hpp"

namespace slowfast {

HomogeneousPair fhn_homogeneous(double v, double b, double c)
{
    require(b > 0.0, ErrorKind::domain, "fhn homogeneous state needs b > 0");
    // u1 - u1^3/3 - (u1 + c)/b + v = 0; take the smallest real root.
    auto f = [&](double x) { return x - x * x * x / 3.0 - (x + c) / b + v; };
    const double r = 2.0 + std::abs(v) + std::abs(c / b) + std::cbrt(3.0 * (std::abs(v) + std::abs(c / b)));
    const int scan = 4000;
    double lo = -r, flo = f(lo);
    for (int i = 1; i <= scan; ++i) {
        const double hi = -r + 2.0 * r * i / scan, fhi = f(hi);
        if (flo == 0.0) return {lo, (lo + c) / b};
        if ((flo > 0) != (fhi > 0)) {
            double a = lo, z = hi, fa = flo;
            for (int it = 0; it < 200 && z - a > 1e-15 * (1 + std::abs(a)); ++it) {
                const double m = 0.5 * (a + z), fm = f(m);
                if ((fm > 0) == (fa > 0)) {
                    a = m;
                    fa = fm;
                } else {
                    z = m;
                }
            }
            double x = 0.5 * (a + z);
            for (int it = 0; it < 3; ++it) {
                const double d = 1.0 - x * x - 1.0 / b;
                if (d != 0.0) x -= f(x) / d;
            }
            return {x, (x + c) / b};
        }
        lo = hi;
        flo = fhi;
    }
    fail(ErrorKind::numerical, "no homogeneous fhn equilibrium found");
}

namespace detail {

SlowFastSystem build_fhn(const ModelPreset& p)
{
    const Grid grid = *p.grid;
    const int n = grid.size();
    const double d1 = param(p, "d1");
    const double b0 = param(p, "b");
    const double c0 = param(p, "c");
    const Mat d2 = second_derivative_matrix(grid);

    SystemDefinition def;
    def.name = "fhn";
    def.n_fast = 2 * n;
    def.m_slow = 1;
    def.p_params = 2;
    def.grid = grid;
    def.components = 2;

    def.rhs_fast = [grid, n, d1](const Vec& u, const Vec& v, const Vec& mu, double) {
        const double b = mu[0], c = mu[1];
        const auto u1 = u.head(n);
        const auto u2 = u.tail(n);
        Vec out(2 * n);
        out.head(n) = d1 * second_derivative(grid, u1) +
                      (u1.array() - u1.array().cube() / 3.0 - u2.array() + v[0]).matrix();
        out.tail(n) = (u1.array() + c - b * u2.array()).matrix();
        return out;
    };
    def.rhs_slow = [](const Vec&, const Vec&, const Vec&, double) { return Vec::Ones(1).eval(); };
    def.jac_u = [d2, n, d1](const Vec& u, const Vec&, const Vec& mu, double) {
        Mat j = Mat::Zero(2 * n, 2 * n);
        j.topLeftCorner(n, n) = d1 * d2;
        for (int i = 0; i < n; ++i) {
            j(i, i) += 1.0 - u[i] * u[i];
            j(i, n + i) = -1.0;
            j(n + i, i) = 1.0;
            j(n + i, n + i) = -mu[0];
        }
        return j;
    };
    def.jac_v = [n](const Vec&, const Vec&, const Vec&, double) {
        Mat j = Mat::Zero(2 * n, 1);
        j.topRows(n).setOnes();
        return j;
    };

    HomogeneousStructure hs;
    hs.components = 2;
    hs.grid = grid;
    hs.diffusion = (Vec(2) << d1, 0.0).finished();
    hs.local_jacobian = [](const Vec& uh, const Vec&, const Vec& mu) {
        Mat j(2, 2);
        j << 1.0 - uh[0] * uh[0], -1.0, 1.0, -mu[0];
        return j;
    };
    def.homogeneous = hs;

    // Reference: homogeneous Hopf equilibrium 1 - u1^2 = b.
    ReferenceEquilibrium ref;
    ref.params.mu = (Vec(2) << b0, c0).finished();
    ref.params.eps = 0.0;
    const double u1 = (b0 > 0.0 && b0 < 1.0) ? -std::sqrt(1.0 - b0) : 0.0;
    const double u2 = (u1 + c0) / b0;
    ref.u.resize(2 * n);
    ref.u.head(n).setConstant(u1);
    ref.u.tail(n).setConstant(u2);
    ref.v = Vec::Constant(1, u2 - u1 + u1 * u1 * u1 / 3.0);
    def.linear_part = def.jac_u(ref.u, ref.v, ref.params.mu, 0.0);
    def.reference = ref;
    return SlowFastSystem(std::move(def));
}

}  // namespace detail
}  // namespace slowfast
