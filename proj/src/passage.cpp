#include "slowfast/passage.hpp"

#include <cmath>

namespace slowfast {

double normalized_distance(const Vec& a, const Vec& b)
{
    require(a.size() == b.size() && a.size() > 0, ErrorKind::contract, "distance between mismatched states");
    return (a - b).norm() / std::sqrt(static_cast<double>(a.size()));
}

DelayMeasurement measure_delay(const Trajectory& traj, const std::function<Vec(double)>& u_branch, double v_cross,
                               int slow_index, double delta, double epsilon, const TubeDistance& distance)
{
    require(traj.size() >= 1, ErrorKind::contract, "empty trajectory");
    require(delta > 0.0, ErrorKind::contract, "tube radius must be positive");
    auto dist = [&](const Vec& u, double v) {
        const Vec ub = u_branch(v);
        return distance ? distance(u, ub) : normalized_distance(u, ub);
    };
    DelayMeasurement m;
    m.v_cross = v_cross;
    m.delta = delta;
    m.epsilon = epsilon;
    const auto slow = [&](std::size_t i) { return traj.v[i][slow_index]; };
    const double d0 = dist(traj.u[0], slow(0));
    if (!(d0 <= delta))
        fail(ErrorKind::precondition, "trajectory starts outside the tube (distance " + std::to_string(d0) + ")");
    const double direction = traj.size() > 1 && slow(traj.size() - 1) < slow(0) ? -1.0 : 1.0;

    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (dist(traj.u[i], slow(i)) <= delta) continue;
        // Bisection on the chord between snapshots i-1 and i.
        auto at = [&](double th, Vec& u, double& v) {
            u = (1.0 - th) * traj.u[i - 1] + th * traj.u[i];
            v = (1.0 - th) * slow(i - 1) + th * slow(i);
        };
        double lo = 0.0, hi = 1.0;
        Vec u;
        double v;
        for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            at(mid, u, v);
            if (dist(u, v) > delta) hi = mid;
            else lo = mid;
        }
        at(hi, u, v);
        m.v_depart = v;
        m.t_depart = (1.0 - hi) * traj.times[i - 1] + hi * traj.times[i];
        m.delay = direction * (m.v_depart - v_cross);
        m.departed = true;
        m.premature = m.delay < 0.0;
        return m;
    }
    return m;
}

DelayMeasurement measure_delay(const SlowFastSystem& sys, const Trajectory& traj, const Branch& branch,
                               const ParameterPoint& params, double delta, const TubeDistance& distance)
{
    require(traj.size() >= 1 && !branch.points.empty(), ErrorKind::contract, "empty trajectory or branch");
    require(traj.u[0].size() == sys.n_fast(), ErrorKind::contract, "trajectory does not match the system");
    const int p = branch.slow_index;
    const double v0 = traj.v.front()[p];
    const double direction = traj.v.back()[p] < v0 ? -1.0 : 1.0;
    std::optional<double> v_cross;
    for (const auto& ev : branch.events) {
        const double ahead = direction * (ev.v_value - v0);
        if (ahead > 0 && (!v_cross || ahead < direction * (*v_cross - v0))) v_cross = ev.v_value;
    }
    if (!v_cross) fail(ErrorKind::precondition, "branch has no bifurcation ahead of the trajectory");
    return measure_delay(
        traj, [&](double v) { return branch_interpolate(branch, v); }, *v_cross, p, delta, params.eps, distance);
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b)
{
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, 1e-14 * std::max(1.0, std::abs(b - a)), 40);
}

}  // namespace

double entry_exit_point(const std::function<double(double)>& re_lambda, double v_in, double v_max)
{
    require(v_max > v_in, ErrorKind::contract, "entry-exit window must extend above v_in");
    if (!(re_lambda(v_in) < 0.0)) fail(ErrorKind::precondition, "re_lambda(v_in) must be negative");
    const int segments = 512;
    const double h = (v_max - v_in) / segments;
    double acc = 0.0, a = v_in;
    bool crossed = false;
    for (int k = 1; k <= segments; ++k) {
        const double b = v_in + k * h;
        if (re_lambda(b) >= 0.0) crossed = true;
        const double next = acc + integrate_adaptive(re_lambda, a, b);
        if (crossed && next >= 0.0) {
            double lo = a, hi = b;
            while (hi - lo > 1e-10 * std::max(1.0, std::abs(hi))) {
                const double mid = 0.5 * (lo + hi);
                if (acc + integrate_adaptive(re_lambda, a, mid) >= 0.0) hi = mid;
                else lo = mid;
            }
            return 0.5 * (lo + hi);
        }
        acc = next;
        a = b;
    }
    fail(ErrorKind::numerical, "no exit: the growth integral stays negative up to v = " + std::to_string(v_max));
}

const char* to_string(Experiment e)
{
    switch (e) {
    case Experiment::fhn_hopf: return "fhn_hopf";
    case Experiment::dde_hopf: return "dde_hopf";
    case Experiment::nonlocal_turing: return "nonlocal_turing";
    case Experiment::schnakenberg_turing_super: return "schnakenberg_turing_super";
    case Experiment::schnakenberg_turing_sub: return "schnakenberg_turing_sub";
    case Experiment::nf_folded_saddle: return "nf_folded_saddle";
    case Experiment::nf_folded_node: return "nf_folded_node";
    }
    return "?";
}

std::vector<Experiment> all_experiments()
{
    return {Experiment::fhn_hopf,
            Experiment::dde_hopf,
            Experiment::nonlocal_turing,
            Experiment::schnakenberg_turing_super,
            Experiment::schnakenberg_turing_sub,
            Experiment::nf_folded_saddle,
            Experiment::nf_folded_node};
}

Experiment experiment_from_string(const std::string& s)
{
    for (Experiment e : all_experiments())
        if (s == to_string(e)) return e;
    fail(ErrorKind::config, "unknown preset experiment '" + s + "'");
}

nlohmann::json to_json(const DelayMeasurement& d)
{
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["v_cross"] = num(d.v_cross);
    j["v_depart"] = num(d.v_depart);
    j["delay"] = num(d.delay);
    j["delay_infinite"] = !d.departed;
    j["delta"] = d.delta;
    j["epsilon"] = d.epsilon;
    j["t_depart"] = num(d.t_depart);
    j["departed"] = d.departed;
    j["premature"] = d.premature;
    return j;
}

}  // namespace slowfast
