#include "slowfast/core.hpp"

#include <cmath>
#include <string>

namespace slowfast {

namespace {

void validate(const SystemDefinition& d)
{
    require(d.n_fast > 0, ErrorKind::contract, "n_fast must be positive");
    require(d.m_slow >= 0 && d.p_params >= 0, ErrorKind::contract, "m_slow and p_params must be non-negative");
    require(static_cast<bool>(d.rhs_fast), ErrorKind::contract, "rhs_fast missing");
    require(d.m_slow == 0 || static_cast<bool>(d.rhs_slow), ErrorKind::contract, "rhs_slow missing");
    if (d.linear_part) {
        require(d.linear_part->rows() == d.n_fast && d.linear_part->cols() == d.n_fast, ErrorKind::contract,
                "linear_part must be n_fast x n_fast");
    }
    if (d.delay) {
        require(d.delay->tau > 0.0, ErrorKind::contract, "delay tau must be positive");
        require(d.delay->k_hist >= 1, ErrorKind::contract, "delay history needs at least one sample");
        require(d.n_fast == d.delay->k_hist + 1, ErrorKind::contract, "delay model fast state must be 1 + k_hist");
        require(static_cast<bool>(d.delay->rhs), ErrorKind::contract, "delay rhs missing");
    }
    if (d.grid) {
        require(d.components >= 1 && d.n_fast == d.components * d.grid->size(), ErrorKind::contract,
                "n_fast must equal components * n_points");
    }
}

}  // namespace

SlowFastSystem::SlowFastSystem(SystemDefinition def)
{
    validate(def);
    def_ = std::make_shared<const SystemDefinition>(std::move(def));
}

void check_finite(const Vec& x, const char* label)
{
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            fail(ErrorKind::overflow, std::string("non-finite value in ") + label + "[" + std::to_string(i) + "]");
        }
    }
}

void check_dimensions(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params)
{
    if (u.size() != sys.n_fast() || v.size() != sys.m_slow() || params.mu.size() != sys.p_params()) {
        fail(ErrorKind::contract, "dimension mismatch for " + sys.name() + ": got (u,v,mu) = (" +
                                      std::to_string(u.size()) + "," + std::to_string(v.size()) + "," +
                                      std::to_string(params.mu.size()) + "), expected (" +
                                      std::to_string(sys.n_fast()) + "," + std::to_string(sys.m_slow()) + "," +
                                      std::to_string(sys.p_params()) + ")");
    }
    require(params.eps >= 0.0, ErrorKind::contract, "eps must be non-negative");
}

Vec SlowFastSystem::fast(const Vec& u, const Vec& v, const ParameterPoint& p) const
{
    Vec du = def_->rhs_fast(u, v, p.mu, p.eps);
    require(du.size() == n_fast(), ErrorKind::contract, "rhs_fast returned wrong length");
    return du;
}

Vec SlowFastSystem::slow(const Vec& u, const Vec& v, const ParameterPoint& p) const
{
    if (m_slow() == 0) return Vec(0);
    Vec g = def_->rhs_slow(u, v, p.mu, p.eps);
    require(g.size() == m_slow(), ErrorKind::contract, "rhs_slow returned wrong length");
    return g;
}

RhsValue eval_rhs(const SlowFastSystem& sys, const State& state, const ParameterPoint& params)
{
    check_dimensions(sys, state.u, state.v, params);
    RhsValue out;
    out.du = sys.fast(state.u, state.v, params);
    check_finite(out.du, "du");
    if (params.eps == 0.0) {
        out.dv = Vec::Zero(sys.m_slow());
    } else {
        out.dv = params.eps * sys.slow(state.u, state.v, params);
        check_finite(out.dv, "dv");
    }
    return out;
}

Mat fd_jacobian_u(const SlowFastSystem& sys, const State& state, const ParameterPoint& params)
{
    check_dimensions(sys, state.u, state.v, params);
    const int n = sys.n_fast();
    const double h = std::max(1e-7, 1e-7 * state.u.lpNorm<Eigen::Infinity>());
    Mat jac(n, n);
    Vec up = state.u;
    for (int j = 0; j < n; ++j) {
        const double keep = up[j];
        up[j] = keep + h;
        Vec fp = sys.fast(up, state.v, params);
        up[j] = keep - h;
        Vec fm = sys.fast(up, state.v, params);
        up[j] = keep;
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    check_finite(jac.reshaped(), "jac_u");
    return jac;
}

Mat fd_jacobian_v(const SlowFastSystem& sys, const State& state, const ParameterPoint& params)
{
    check_dimensions(sys, state.u, state.v, params);
    const int n = sys.n_fast(), m = sys.m_slow();
    const double h = std::max(1e-7, 1e-7 * (m > 0 ? state.v.lpNorm<Eigen::Infinity>() : 0.0));
    Mat jac(n, m);
    Vec vp = state.v;
    for (int j = 0; j < m; ++j) {
        const double keep = vp[j];
        vp[j] = keep + h;
        Vec fp = sys.fast(state.u, vp, params);
        vp[j] = keep - h;
        Vec fm = sys.fast(state.u, vp, params);
        vp[j] = keep;
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

Mat jacobian_u(const SlowFastSystem& sys, const State& state, const ParameterPoint& params)
{
    if (!sys.has_jac_u()) return fd_jacobian_u(sys, state, params);
    check_dimensions(sys, state.u, state.v, params);
    Mat jac = sys.definition().jac_u(state.u, state.v, params.mu, params.eps);
    require(jac.rows() == sys.n_fast() && jac.cols() == sys.n_fast(), ErrorKind::contract,
            "jac_u returned wrong shape");
    check_finite(jac.reshaped(), "jac_u");
    return jac;
}

Mat jacobian_v(const SlowFastSystem& sys, const State& state, const ParameterPoint& params)
{
    if (!sys.has_jac_v()) return fd_jacobian_v(sys, state, params);
    check_dimensions(sys, state.u, state.v, params);
    Mat jac = sys.definition().jac_v(state.u, state.v, params.mu, params.eps);
    require(jac.rows() == sys.n_fast() && jac.cols() == sys.m_slow(), ErrorKind::contract,
            "jac_v returned wrong shape");
    return jac;
}

RemainderProbe probe_linear_remainder(const SlowFastSystem& sys, const Vec& direction)
{
    require(sys.linear_part().has_value(), ErrorKind::precondition, "system has no linear_part");
    require(sys.reference().has_value(), ErrorKind::precondition, "system has no reference equilibrium");
    const auto& ref = *sys.reference();
    const Mat& L = *sys.linear_part();
    const Vec f0 = sys.fast(ref.u, ref.v, ref.params);
    auto residual = [&](double scale) {
        const Vec du = scale * direction;
        const Vec r = sys.fast(ref.u + du, ref.v, ref.params) - f0 - L * du;
        return r.lpNorm<Eigen::Infinity>();
    };
    return {residual(1e-3), residual(5e-4)};
}

}  // namespace slowfast
