#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "slowfast/core.hpp"

namespace slowfast {

enum class Method { erk45_adaptive, imex_cn_ab2 };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct IntegratorOptions {
    Method method = Method::erk45_adaptive;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    // Upper bound for adaptive steps; the fixed step of imex_cn_ab2.
    double max_step = 0.5;
    double t_end = 1.0;
    double initial_step = 1e-3;
    int dense_every = 1;
    long max_steps = 50'000'000;

    void validate() const;
};

struct TrajectoryEvent {
    double time;
    std::string kind;
    std::string payload;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> u;
    std::vector<Vec> v;
    int dense_every = 1;
    std::vector<TrajectoryEvent> events;

    std::size_t size() const { return times.size(); }
};

Trajectory integrate(const SlowFastSystem& sys, const State& state0, const ParameterPoint& params,
                     const IntegratorOptions& opts);

using HistoryFn = std::function<double(double)>;

// Method of steps for scalar delay systems. Snapshot u is the extended state
// [u(t), u(t - dt_hist), ..., u(t - tau)] so it lives in the system's fast space.
Trajectory integrate_dde(const SlowFastSystem& sys, const HistoryFn& history, const Vec& v0,
                         const ParameterPoint& params, const IntegratorOptions& opts);

// CSV `t,v_1..v_m,u_norm2,u_min,u_max`; u_norm2 is the 2-norm over sqrt(n).
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
// One CSV per stored snapshot with columns `x,u_1..u_q`; every `stride`-th snapshot.
// index.csv lists `file,t,v_1..v_m` for the files written.
void write_snapshots(const Trajectory& traj, const Vec& x, int components, const std::filesystem::path& dir,
                     int stride);

// Embedded Dormand-Prince 5(4) stepper with PI step control on a mixed
// componentwise error norm.
class DormandPrince {
public:
    using Rhs = std::function<Vec(double t, const Vec& y)>;
    DormandPrince(Rhs rhs, double rel_tol, double abs_tol, double max_step);

    // Advances (t, y) exactly to t_target with adaptive substeps.
    void advance(double& t, Vec& y, double t_target);
    double step_size() const { return h_; }
    void set_step_size(double h) { h_ = h; }
    long accepted() const { return accepted_; }

private:
    Rhs rhs_;
    double rel_, abs_, hmax_;
    double h_ = 1e-3;
    double err_prev_ = 1.0;
    long accepted_ = 0;
    Vec k1_;
    double t_k1_ = 0.0;
    bool have_k1_ = false;
};

}  // namespace slowfast
