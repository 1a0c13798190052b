#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "slowfast/discretize.hpp"
#include "slowfast/error.hpp"

namespace slowfast {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

struct ParameterPoint {
    Vec mu;
    double eps = 0.0;
};

struct State {
    double t = 0.0;
    Vec u;
    Vec v;
};

using FieldFn = std::function<Vec(const Vec& u, const Vec& v, const Vec& mu, double eps)>;
using MatrixFn = std::function<Mat(const Vec& u, const Vec& v, const Vec& mu, double eps)>;

// Scalar delay equation u'(t) = f(u(t), u(t - tau), v, mu, eps). The fast
// state of a delay model is [u(t), u(t - dt), ..., u(t - k_hist*dt)].
struct DelaySpec {
    double tau = 1.0;
    int k_hist = 128;
    std::function<double(double u, double u_delayed, const Vec& v, const Vec& mu, double eps)> rhs;
    // d rhs / d u and d rhs / d u_delayed; used by analytic Jacobians and spectral hooks.
    std::function<double(double u, double u_delayed, const Vec& v, const Vec& mu)> d_u;
    std::function<double(double u, double u_delayed, const Vec& v, const Vec& mu)> d_delayed;
};

// Per-mode structure of a spatially homogeneous layer linearization.
// Fast state layout is component-major: u[c * n_points + j].
struct HomogeneousStructure {
    int components = 1;
    Grid grid;
    Vec diffusion;  // one coefficient per component
    // q x q local reaction Jacobian at homogeneous values
    std::function<Mat(const Vec& u_hom, const Vec& v, const Vec& mu)> local_jacobian;
    // optional nonlocal part: contribution is w_n * nonlocal_jacobian(u_hom, v, mu)
    std::function<Mat(const Vec& u_hom, const Vec& v, const Vec& mu)> nonlocal_jacobian;
    std::optional<Vec> kernel_coeffs;  // w_n, n = 0..n_points/2 (periodic grids)
};

// Leading eigenvalue provider overriding the dense spectrum of jac_u
// (used where the fast state is a discretization of an operator whose
// spectrum is known more accurately by other means).
using SpectrumHook = std::function<CVec(const Vec& u, const Vec& v, const Vec& mu)>;

struct ReferenceEquilibrium {
    Vec u;
    Vec v;
    ParameterPoint params;
};

struct SystemDefinition {
    std::string name;
    int n_fast = 0;
    int m_slow = 0;
    int p_params = 0;
    FieldFn rhs_fast;
    FieldFn rhs_slow;
    std::optional<Mat> linear_part;
    MatrixFn jac_u;
    MatrixFn jac_v;
    std::optional<DelaySpec> delay;
    std::optional<Grid> grid;
    int components = 1;
    std::optional<HomogeneousStructure> homogeneous;
    SpectrumHook spectrum_hook;
    std::optional<ReferenceEquilibrium> reference;
};

class SlowFastSystem {
public:
    explicit SlowFastSystem(SystemDefinition def);

    const std::string& name() const { return def_->name; }
    int n_fast() const { return def_->n_fast; }
    int m_slow() const { return def_->m_slow; }
    int p_params() const { return def_->p_params; }
    const SystemDefinition& definition() const { return *def_; }

    const std::optional<Mat>& linear_part() const { return def_->linear_part; }
    const std::optional<DelaySpec>& delay() const { return def_->delay; }
    const std::optional<Grid>& grid() const { return def_->grid; }
    int components() const { return def_->components; }
    const std::optional<HomogeneousStructure>& homogeneous() const { return def_->homogeneous; }
    const std::optional<ReferenceEquilibrium>& reference() const { return def_->reference; }
    bool has_jac_u() const { return static_cast<bool>(def_->jac_u); }
    bool has_jac_v() const { return static_cast<bool>(def_->jac_v); }
    const SpectrumHook& spectrum_hook() const { return def_->spectrum_hook; }

    Vec fast(const Vec& u, const Vec& v, const ParameterPoint& p) const;
    Vec slow(const Vec& u, const Vec& v, const ParameterPoint& p) const;

private:
    std::shared_ptr<const SystemDefinition> def_;
};

struct RhsValue {
    Vec du;
    Vec dv;
};

RhsValue eval_rhs(const SlowFastSystem& sys, const State& state, const ParameterPoint& params);

Mat jacobian_u(const SlowFastSystem& sys, const State& state, const ParameterPoint& params);
Mat jacobian_v(const SlowFastSystem& sys, const State& state, const ParameterPoint& params);

// Central differences regardless of analytic availability.
Mat fd_jacobian_u(const SlowFastSystem& sys, const State& state, const ParameterPoint& params);
Mat fd_jacobian_v(const SlowFastSystem& sys, const State& state, const ParameterPoint& params);

void check_dimensions(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params);

// Throws ErrorKind::overflow naming the first non-finite entry.
void check_finite(const Vec& x, const char* label);

// Max-norm of the nonlinear remainder F(u*+h) - F(u*) - L h for h and h/2;
// used to check that linear_part is the linearization at the reference.
struct RemainderProbe {
    double residual_full;
    double residual_half;
};
RemainderProbe probe_linear_remainder(const SlowFastSystem& sys, const Vec& direction);

}  // namespace slowfast
