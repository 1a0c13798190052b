#include "slowfast/gspt.hpp"

#include <cmath>

namespace slowfast {

NfReducedResult nf_reduced_system(const NeuralFieldData& nf, const Vec& u_fold, double v1_fold,
                                  const FoldNormalForm& nform, const Vec& mu)
{
    require(mu.size() == 3, ErrorKind::contract, "neural-field reduced system needs mu = (a, b, c)");
    require(nform.alpha.size() >= 1 && nform.zeta.size() == u_fold.size(), ErrorKind::contract,
            "fold normal form does not match the fold point");
    const double alpha = nform.alpha[0];
    const double q = 0.5 * nform.beta;
    if (!(std::abs(q) > 1e-12) || !(std::abs(alpha) > 1e-12))
        fail(ErrorKind::degenerate, "fold normal-form coefficients vanish");

    auto activity = [nf, u_fold, v1_fold, zeta = nform.zeta](double a, double b1) {
        return nf.activity(u_fold + a * zeta, v1_fold + b1);
    };

    SystemDefinition def;
    def.name = "nf_reduced";
    def.n_fast = 1;
    def.m_slow = 2;
    def.p_params = 3;
    def.rhs_fast = [alpha, q](const Vec& u, const Vec& v, const Vec&, double) {
        return Vec::Constant(1, alpha * v[0] + q * u[0] * u[0]).eval();
    };
    def.rhs_slow = [activity, v1_fold](const Vec& u, const Vec& v, const Vec& m, double) {
        const double h = activity(u[0], v[0]);
        Vec g(2);
        g << v[1] + m[2] * h, -v1_fold - v[0] + m[0] + m[1] * h;
        return g;
    };
    def.jac_u = [q](const Vec& u, const Vec&, const Vec&, double) { return Mat::Constant(1, 1, 2.0 * q * u[0]).eval(); };
    def.jac_v = [alpha](const Vec&, const Vec&, const Vec&, double) {
        Mat j(1, 2);
        j << alpha, 0.0;
        return j;
    };

    NfReducedResult r{SlowFastSystem(def), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {}, {}, Mat()};
    r.q = q;
    r.kappa = alpha / q;
    r.H0 = activity(0.0, 0.0);
    const double h = 1e-6;
    r.dH_dA = (activity(h, 0.0) - activity(-h, 0.0)) / (2.0 * h);
    r.dH_dB1 = (activity(0.0, h) - activity(0.0, -h)) / (2.0 * h);
    r.xi = -mu[2] * r.H0 + 0.0;

    // Closed-form entries; the fold curve B1 = -q A^2 / alpha is flat at A = 0.
    const double J11 = mu[2] * r.kappa * r.dH_dA + 0.0;
    const double J12 = r.kappa;
    const double J21 = -2.0 * (-v1_fold + mu[0] + mu[1] * r.H0);
    r.lemma = classify_folded_singularity(J11, J12, J21);

    // Independent route: desingularized flow restricted to S in the chart (A, B2).
    ParameterPoint params{mu, 0.0};
    auto chart = [&](double a, double b2) {
        const Vec u = Vec::Constant(1, a);
        Vec v(2);
        v << -q * a * a / alpha, b2;
        const FlowValue f = desingularized_rhs(r.system, u, v, params);
        return Eigen::Vector2d(f.du[0], f.dv[1]);
    };
    // du is affine in B2 at A = 0: one secant step finds the root.
    const double g0 = chart(0.0, 0.0)[0], g1 = chart(0.0, 1.0)[0];
    if (!(std::abs(g1 - g0) > 1e-14)) fail(ErrorKind::degenerate, "desingularized flow does not depend on B2");
    const double xi = -g0 / (g1 - g0);
    Mat m(2, 2);
    const double hj = 1e-6 * std::max(1.0, std::abs(xi));
    m.col(0) = (chart(hj, xi) - chart(-hj, xi)) / (2.0 * hj);
    m.col(1) = (chart(0.0, xi + hj) - chart(0.0, xi - hj)) / (2.0 * hj);
    r.desing_jacobian = m / q;
    r.desingularized = classify_folded_singularity(r.desing_jacobian(0, 0), r.desing_jacobian(0, 1),
                                                   r.desing_jacobian(1, 0));
    return r;
}

}  // namespace slowfast
