#include "builders.hpp"

namespace slowfast::detail {

// u_t = d u_xx + (v - b) u - u (w * u), box kernel of half-width h.
SlowFastSystem build_nonlocal_rd(const ModelPreset& p)
{
    const Grid grid = *p.grid;
    const int n = grid.size();
    const double d = param(p, "d"), b = param(p, "b"), h = param(p, "h");
    const Vec kernel = box_kernel_samples(grid, h);
    const Mat conv = convolution_matrix(grid, kernel);
    const Mat d2 = second_derivative_matrix(grid);

    SystemDefinition def;
    def.name = "nonlocal_rd";
    def.n_fast = n;
    def.m_slow = 1;
    def.p_params = 0;
    def.grid = grid;

    def.rhs_fast = [grid, kernel, d, b](const Vec& u, const Vec& v, const Vec&, double) {
        const Vec wu = circular_convolution(grid, kernel, u);
        return (d * second_derivative(grid, u) + ((v[0] - b) * u.array() - u.array() * wu.array()).matrix()).eval();
    };
    def.rhs_slow = [](const Vec&, const Vec&, const Vec&, double) { return Vec::Ones(1).eval(); };
    def.jac_u = [grid, kernel, conv, d2, d, b](const Vec& u, const Vec& v, const Vec&, double) {
        const Vec wu = circular_convolution(grid, kernel, u);
        Mat j = d * d2 - u.asDiagonal() * conv;
        j.diagonal().array() += v[0] - b - wu.array();
        return j;
    };
    def.jac_v = [](const Vec& u, const Vec&, const Vec&, double) { return Mat(u); };

    HomogeneousStructure hs;
    hs.components = 1;
    hs.grid = grid;
    hs.diffusion = Vec::Constant(1, d);
    hs.local_jacobian = [b](const Vec& uh, const Vec& v, const Vec&) {
        return Mat::Constant(1, 1, v[0] - b - uh[0]);
    };
    hs.nonlocal_jacobian = [](const Vec& uh, const Vec&, const Vec&) { return Mat::Constant(1, 1, -uh[0]); };
    hs.kernel_coeffs = kernel_fourier_coeffs(grid, kernel).coefficients;
    def.homogeneous = hs;

    ReferenceEquilibrium ref;
    ref.params.mu = Vec(0);
    ref.v = Vec::Constant(1, 1.5);
    ref.u = Vec::Constant(n, 1.5 - b);
    def.linear_part = def.jac_u(ref.u, ref.v, ref.params.mu, 0.0);
    def.reference = ref;
    return SlowFastSystem(std::move(def));
}

}  // namespace slowfast::detail
