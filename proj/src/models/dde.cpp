#include <cmath>

#include "builders.hpp"
#include "slowfast/spectra.hpp"

namespace slowfast {

double dde_equilibrium(double v, double d)
{
    // (v - 1) u - u^3 + d = 0
    auto f = [&](double u) { return (v - 1.0) * u - u * u * u + d; };
    auto df = [&](double u) { return v - 1.0 - 3.0 * u * u; };
    double u = v < 1.0 ? d / (1.0 - v) : std::sqrt(v - 1.0) + (d >= 0 ? 0.1 : -0.1);
    if (v < 1.0) {
        // unique root; bracket then polish
        const double r = 1.0 + std::abs(d) + std::abs(v);
        double lo = -r, hi = r;
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (lo + hi);
            (f(m) > 0.0 ? lo : hi) = m;
        }
        u = 0.5 * (lo + hi);
    }
    for (int it = 0; it < 50; ++it) {
        const double step = f(u) / df(u);
        u -= step;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(u))) break;
    }
    require(std::isfinite(u) && std::abs(f(u)) < 1e-12, ErrorKind::numerical, "dde equilibrium did not converge");
    return u;
}

namespace detail {

SlowFastSystem build_dde(const ModelPreset& p)
{
    const double tau = param(p, "tau");
    const double kh = param(p, "k_hist");
    require(tau > 0.0, ErrorKind::config, "tau must be positive");
    require(kh >= 2.0 && kh == std::floor(kh), ErrorKind::config, "k_hist must be an integer >= 2");
    const int k = static_cast<int>(kh);
    const double dt = tau / k;

    DelaySpec ds;
    ds.tau = tau;
    ds.k_hist = k;
    ds.rhs = [](double u, double ud, const Vec& v, const Vec& mu, double) {
        return v[0] * u - u * u * u - ud + mu[0];
    };
    ds.d_u = [](double u, double, const Vec& v, const Vec&) { return v[0] - 3.0 * u * u; };
    ds.d_delayed = [](double, double, const Vec&, const Vec&) { return -1.0; };

    SystemDefinition def;
    def.name = "dde";
    def.n_fast = k + 1;
    def.m_slow = 1;
    def.p_params = 1;
    def.delay = ds;

    // History samples follow the transport equation phi_t = phi_theta,
    // second-order upwind except for the first sample.
    def.rhs_fast = [ds, k, dt](const Vec& u, const Vec& v, const Vec& mu, double eps) {
        Vec out(k + 1);
        out[0] = ds.rhs(u[0], u[k], v, mu, eps);
        out[1] = -(u[1] - u[0]) / dt;
        for (int i = 2; i <= k; ++i) out[i] = -(3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * dt);
        return out;
    };
    def.rhs_slow = [](const Vec&, const Vec&, const Vec&, double) { return Vec::Ones(1).eval(); };
    def.jac_u = [ds, k, dt](const Vec& u, const Vec& v, const Vec& mu, double) {
        Mat j = Mat::Zero(k + 1, k + 1);
        j(0, 0) = ds.d_u(u[0], u[k], v, mu);
        j(0, k) += ds.d_delayed(u[0], u[k], v, mu);
        j(1, 1) = -1.0 / dt;
        j(1, 0) = 1.0 / dt;
        for (int i = 2; i <= k; ++i) {
            j(i, i) = -1.5 / dt;
            j(i, i - 1) = 2.0 / dt;
            j(i, i - 2) = -0.5 / dt;
        }
        return j;
    };
    def.jac_v = [k](const Vec& u, const Vec&, const Vec&, double) {
        Mat j = Mat::Zero(k + 1, 1);
        j(0, 0) = u[0];
        return j;
    };
    // Exact characteristic roots of the linearization about a constant state.
    def.spectrum_hook = [ds](const Vec& u, const Vec& v, const Vec& mu) {
        const double a = ds.d_u(u[0], u[0], v, mu);
        const double b = ds.d_delayed(u[0], u[0], v, mu);
        return delay_characteristic_roots(a, b, ds.tau, {0, -1, 1, -2, 2, -3, 3});
    };

    ReferenceEquilibrium ref;
    ref.params = preset_parameters(p);
    ref.params.eps = 0.0;
    ref.v = Vec::Constant(1, -1.0);
    ref.u = Vec::Constant(k + 1, dde_equilibrium(-1.0, ref.params.mu[0]));
    def.linear_part = def.jac_u(ref.u, ref.v, ref.params.mu, 0.0);
    def.reference = ref;
    return SlowFastSystem(std::move(def));
}

}  // namespace detail
}  // namespace slowfast
