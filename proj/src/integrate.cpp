#include "slowfast/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "slowfast/io.hpp"

namespace slowfast {

const char* to_string(Method m) { return m == Method::erk45_adaptive ? "erk45_adaptive" : "imex_cn_ab2"; }

Method method_from_string(const std::string& s)
{
    if (s == "erk45_adaptive") return Method::erk45_adaptive;
    if (s == "imex_cn_ab2") return Method::imex_cn_ab2;
    fail(ErrorKind::config, "unknown integrator method '" + s + "'");
}

void IntegratorOptions::validate() const
{
    auto in_range = [](double x) { return x >= 1e-14 && x <= 1e-2; };
    require(in_range(rel_tol), ErrorKind::config, "rel_tol must lie in [1e-14, 1e-2]");
    require(in_range(abs_tol), ErrorKind::config, "abs_tol must lie in [1e-14, 1e-2]");
    require(max_step > 0.0 && std::isfinite(max_step), ErrorKind::config, "max_step must be positive");
    require(std::isfinite(t_end), ErrorKind::config, "t_end must be finite");
    require(dense_every >= 1, ErrorKind::config, "dense_every must be >= 1");
    require(initial_step > 0.0, ErrorKind::config, "initial_step must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

}  // namespace

DormandPrince::DormandPrince(Rhs rhs, double rel_tol, double abs_tol, double max_step)
    : rhs_(std::move(rhs)), rel_(rel_tol), abs_(abs_tol), hmax_(max_step)
{
}

void DormandPrince::advance(double& t, Vec& y, double t_target)
{
    while (t < t_target) {
        if (!have_k1_ || t_k1_ != t) {
            k1_ = rhs_(t, y);
            t_k1_ = t;
            have_k1_ = true;
        }
        const double remaining = t_target - t;
        const double h_prop = std::min(h_, hmax_);
        const bool last = h_prop >= remaining;
        const double h = last ? remaining : h_prop;
        const bool clipped = h < h_prop;
        if (h < 1e-14) {
            std::ostringstream msg;
            msg << "step size underflow (h=" << h << ") at t=" << t << ", |y|_inf=" << y.lpNorm<Eigen::Infinity>();
            fail(ErrorKind::stiffness, msg.str());
        }
        const Vec& k1 = k1_;
        const Vec k2 = rhs_(t + c2 * h, y + h * a21 * k1);
        const Vec k3 = rhs_(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vec k4 = rhs_(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = rhs_(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 = rhs_(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Vec ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double tnew = last ? t_target : t + h;
        check_finite(ynew, "state");
        const Vec k7 = rhs_(tnew, ynew);
        const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const Eigen::ArrayXd scale = abs_ + rel_ * y.array().abs().max(ynew.array().abs());
        const double en = y.size() > 0 ? std::sqrt((err.array() / scale).square().mean()) : 0.0;
        if (en <= 1.0) {
            const double e = std::max(en, 1e-10);
            double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev_, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            err_prev_ = e;
            h_ = std::min(hmax_, clipped ? std::max(h_prop, h * fac) : h * fac);
            t = tnew;
            y = std::move(ynew);
            k1_ = k7;
            t_k1_ = t;
            ++accepted_;
        } else {
            h_ = h * std::max(0.2, 0.9 * std::pow(en, -0.2));
        }
    }
}

namespace {

void push_snapshot(Trajectory& tr, double t, const Vec& u, const Vec& v)
{
    tr.times.push_back(t);
    tr.u.push_back(u);
    tr.v.push_back(v);
}

Trajectory integrate_erk45(const SlowFastSystem& sys, const State& s0, const ParameterPoint& params,
                           const IntegratorOptions& opts)
{
    const int n = sys.n_fast(), m = sys.m_slow();
    auto rhs = [&](double, const Vec& y) {
        State st{0.0, y.head(n), y.tail(m)};
        RhsValue r = eval_rhs(sys, st, params);
        Vec out(n + m);
        out << r.du, r.dv;
        return out;
    };
    DormandPrince dp(rhs, opts.rel_tol, opts.abs_tol, opts.max_step);
    dp.set_step_size(std::min(opts.initial_step, opts.max_step));
    Trajectory tr;
    tr.dense_every = opts.dense_every;
    Vec y(n + m);
    y << s0.u, s0.v;
    double t = s0.t;
    push_snapshot(tr, t, s0.u, s0.v);
    long steps = 0;
    while (t < opts.t_end) {
        // One accepted step at a time so snapshots follow the stride.
        const long before = dp.accepted();
        const double target = std::min(opts.t_end, t + std::min(dp.step_size(), opts.max_step));
        dp.advance(t, y, target);
        steps += dp.accepted() - before;
        if (steps > opts.max_steps) fail(ErrorKind::stiffness, "maximum number of steps exceeded");
        if (steps % opts.dense_every == 0 || t >= opts.t_end) push_snapshot(tr, t, y.head(n), y.tail(m));
    }
    return tr;
}

Trajectory integrate_imex(const SlowFastSystem& sys, const State& s0, const ParameterPoint& params,
                          const IntegratorOptions& opts)
{
    require(sys.linear_part().has_value(), ErrorKind::unsupported, "imex_cn_ab2 needs a linear_part");
    const Mat& L = *sys.linear_part();
    const int n = sys.n_fast();
    const double span = opts.t_end - s0.t;
    Trajectory tr;
    tr.dense_every = opts.dense_every;
    push_snapshot(tr, s0.t, s0.u, s0.v);
    if (span <= 0.0) return tr;
    const long steps = static_cast<long>(std::ceil(span / opts.max_step - 1e-12));
    if (steps > opts.max_steps) fail(ErrorKind::stiffness, "maximum number of steps exceeded");
    const double dt = span / double(steps);
    Mat lhs = -0.5 * dt * L;
    lhs.diagonal().array() += 1.0;
    const Eigen::PartialPivLU<Mat> lu(lhs);
    Mat rhs_op = 0.5 * dt * L;
    rhs_op.diagonal().array() += 1.0;

    Vec u = s0.u, v = s0.v;
    Vec n_prev, g_prev;
    for (long k = 0; k < steps; ++k) {
        const RhsValue r = eval_rhs(sys, State{0.0, u, v}, params);
        const Vec nl = r.du - L * u;
        Vec u_next;
        Vec v_next;
        if (k == 0) {
            u_next = lu.solve(rhs_op * u + dt * nl);
            v_next = v + dt * r.dv;
        } else {
            u_next = lu.solve(rhs_op * u + dt * (1.5 * nl - 0.5 * n_prev));
            v_next = v + dt * (1.5 * r.dv - 0.5 * g_prev);
        }
        check_finite(u_next, "u");
        n_prev = nl;
        g_prev = r.dv;
        u = std::move(u_next);
        v = std::move(v_next);
        const double t = (k + 1 == steps) ? opts.t_end : s0.t + dt * double(k + 1);
        if ((k + 1) % opts.dense_every == 0 || k + 1 == steps) push_snapshot(tr, t, u, v);
    }
    (void)n;
    return tr;
}

}  // namespace

Trajectory integrate(const SlowFastSystem& sys, const State& state0, const ParameterPoint& params,
                     const IntegratorOptions& opts)
{
    if (sys.delay()) fail(ErrorKind::unsupported, "delay systems must use integrate_dde");
    opts.validate();
    check_dimensions(sys, state0.u, state0.v, params);
    check_finite(state0.u, "u0");
    check_finite(state0.v, "v0");
    return opts.method == Method::erk45_adaptive ? integrate_erk45(sys, state0, params, opts)
                                                 : integrate_imex(sys, state0, params, opts);
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path)
{
    std::ostringstream out;
    out << "t";
    const std::size_t m = traj.v.empty() ? 0 : static_cast<std::size_t>(traj.v.front().size());
    for (std::size_t j = 0; j < m; ++j) out << ",v_" << (j + 1);
    out << ",u_norm2,u_min,u_max\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Vec& u = traj.u[i];
        out << fmt_double(traj.times[i]);
        for (std::size_t j = 0; j < m; ++j) out << ',' << fmt_double(traj.v[i][static_cast<Eigen::Index>(j)]);
        out << ',' << fmt_double(u.norm() / std::sqrt(double(u.size()))) << ',' << fmt_double(u.minCoeff()) << ','
            << fmt_double(u.maxCoeff()) << '\n';
    }
    write_text(path, out.str());
}

void write_snapshots(const Trajectory& traj, const Vec& x, int components, const std::filesystem::path& dir,
                     int stride)
{
    require(stride >= 1 && components >= 1, ErrorKind::contract, "invalid snapshot stride/components");
    ensure_directory(dir);
    const Eigen::Index n = x.size();
    const Eigen::Index m = traj.v.empty() ? 0 : traj.v.front().size();
    std::ostringstream index;
    index << "file,t";
    for (Eigen::Index j = 0; j < m; ++j) index << ",v_" << (j + 1);
    index << '\n';
    for (std::size_t i = 0; i < traj.size(); i += static_cast<std::size_t>(stride)) {
        const Vec& u = traj.u[i];
        require(u.size() == n * components, ErrorKind::contract, "snapshot size does not match coordinates");
        std::ostringstream out;
        out << "x";
        for (int c = 0; c < components; ++c) out << ",u_" << (c + 1);
        out << '\n';
        for (Eigen::Index j = 0; j < n; ++j) {
            out << fmt_double(x[j]);
            for (int c = 0; c < components; ++c) out << ',' << fmt_double(u[c * n + j]);
            out << '\n';
        }
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%06zu.csv", i);
        write_text(dir / name, out.str());
        index << name << ',' << fmt_double(traj.times[i]);
        for (Eigen::Index j = 0; j < m; ++j) index << ',' << fmt_double(traj.v[i][j]);
        index << '\n';
    }
    write_text(dir / "index.csv", index.str());
}

}  // namespace slowfast
