#include <cmath>

#include "builders.hpp"

namespace slowfast {

HomogeneousPair schnakenberg_homogeneous(const SchnakenbergParams& p)
{
    if (p.r == 0.0) fail(ErrorKind::domain, "schnakenberg homogeneous state is degenerate for r = 0");
    const double u1 = p.b / p.r;
    const double den = p.v * u1 * u1 + p.h;
    if (!(den > 0.0)) fail(ErrorKind::domain, "schnakenberg homogeneous state needs v*u1^2 + h > 0");
    return {u1, (p.c + p.r) * u1 / den};
}

namespace detail {

SlowFastSystem build_schnakenberg(const ModelPreset& p)
{
    const Grid grid = *p.grid;
    const int n = grid.size();
    const double d1 = param(p, "d1"), d2 = param(p, "d2");
    const double c = param(p, "c"), r = param(p, "r"), h = param(p, "h"), b = param(p, "b");
    const Mat lap = second_derivative_matrix(grid);

    SystemDefinition def;
    def.name = "schnakenberg";
    def.n_fast = 2 * n;
    def.m_slow = 1;
    def.p_params = 0;
    def.grid = grid;
    def.components = 2;

    def.rhs_fast = [=](const Vec& u, const Vec& v, const Vec&, double) {
        const auto u1 = u.head(n).array();
        const auto u2 = u.tail(n).array();
        const Eigen::ArrayXd prod = v[0] * u1.square() * u2;
        Vec out(2 * n);
        out.head(n) = d1 * second_derivative(grid, u.head(n)) + (prod - (c + r) * u1 + h * u2).matrix();
        out.tail(n) = d2 * second_derivative(grid, u.tail(n)) + (-prod + c * u1 - h * u2 + b).matrix();
        return out;
    };
    def.rhs_slow = [](const Vec&, const Vec&, const Vec&, double) { return Vec::Ones(1).eval(); };
    def.jac_u = [=](const Vec& u, const Vec& v, const Vec&, double) {
        Mat j = Mat::Zero(2 * n, 2 * n);
        j.topLeftCorner(n, n) = d1 * lap;
        j.bottomRightCorner(n, n) = d2 * lap;
        for (int i = 0; i < n; ++i) {
            const double a1 = u[i], a2 = u[n + i];
            j(i, i) += 2.0 * v[0] * a1 * a2 - (c + r);
            j(i, n + i) += v[0] * a1 * a1 + h;
            j(n + i, i) += -2.0 * v[0] * a1 * a2 + c;
            j(n + i, n + i) += -v[0] * a1 * a1 - h;
        }
        return j;
    };
    def.jac_v = [n](const Vec& u, const Vec&, const Vec&, double) {
        Mat j(2 * n, 1);
        const Eigen::ArrayXd prod = u.head(n).array().square() * u.tail(n).array();
        j.col(0).head(n) = prod.matrix();
        j.col(0).tail(n) = -prod.matrix();
        return j;
    };

    HomogeneousStructure hs;
    hs.components = 2;
    hs.grid = grid;
    hs.diffusion = (Vec(2) << d1, d2).finished();
    hs.local_jacobian = [=](const Vec& uh, const Vec& v, const Vec&) {
        Mat j(2, 2);
        j << 2.0 * v[0] * uh[0] * uh[1] - (c + r), v[0] * uh[0] * uh[0] + h, -2.0 * v[0] * uh[0] * uh[1] + c,
            -v[0] * uh[0] * uh[0] - h;
        return j;
    };
    def.homogeneous = hs;

    ReferenceEquilibrium ref;
    ref.params.mu = Vec(0);
    ref.v = Vec::Constant(1, 1.5);
    const auto eq = schnakenberg_homogeneous({1.5, c, r, h, b});
    ref.u.resize(2 * n);
    ref.u.head(n).setConstant(eq.u1);
    ref.u.tail(n).setConstant(eq.u2);
    def.linear_part = def.jac_u(ref.u, ref.v, ref.params.mu, 0.0);
    def.reference = ref;
    return SlowFastSystem(std::move(def));
}

}  // namespace detail
}  // namespace slowfast
