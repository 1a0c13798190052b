#include "slowfast/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slowfast/io.hpp"

namespace slowfast {

const char* to_string(Stability s)
{
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::centre: return "centre";
    }
    return "?";
}

const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::fold: return "fold";
    case EventKind::hopf: return "hopf";
    case EventKind::turing: return "turing";
    }
    return "?";
}

Vec Branch::slow_at(double v) const
{
    Vec s = v_base;
    s[slow_index] = v;
    return s;
}

Vec newton_steady(const SlowFastSystem& sys, const Vec& u_guess, const Vec& v, const ParameterPoint& params,
                  const NewtonOptions& opts)
{
    ParameterPoint layer = params;
    layer.eps = 0.0;
    check_dimensions(sys, u_guess, v, layer);
    Vec u = u_guess;
    Vec f = sys.fast(u, v, layer);
    double res = f.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < opts.max_iter && res > opts.tol; ++it) {
        const Mat j = jacobian_u(sys, State{0.0, u, v}, layer);
        const Eigen::PartialPivLU<Mat> lu(j);
        if (!(lu.rcond() > 1e-14)) {
            fail(ErrorKind::degenerate, "singular Jacobian in Newton (near a fold); use arclength continuation");
        }
        const Vec step = lu.solve(-f);
        double lambda = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls) {
            const Vec trial = u + lambda * step;
            const Vec ft = sys.fast(trial, v, layer);
            const double rt = ft.lpNorm<Eigen::Infinity>();
            if (std::isfinite(rt) && (rt < res || rt <= opts.tol)) {
                u = trial;
                f = ft;
                res = rt;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    if (!(res <= opts.tol)) {
        std::ostringstream msg;
        msg << "Newton did not converge: final residual " << res;
        fail(ErrorKind::numerical, msg.str());
    }
    return u;
}

namespace {

bool is_homogeneous(const SlowFastSystem& sys, const Vec& u)
{
    if (!sys.homogeneous()) return false;
    const int q = sys.components(), n = sys.n_fast() / q;
    for (int c = 0; c < q; ++c) {
        const auto seg = u.segment(c * n, n);
        const double mean = seg.mean();
        if ((seg.array() - mean).abs().maxCoeff() > 1e-9 * (1.0 + std::abs(mean))) return false;
    }
    return true;
}

// Hook, then the modal decomposition at homogeneous states, then dense.
CVec layer_spectrum(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params)
{
    if (sys.spectrum_hook()) {
        CVec eigs = sys.spectrum_hook()(u, v, params.mu);
        sort_spectrum(eigs);
        return eigs;
    }
    if (is_homogeneous(sys, u)) return homogeneous_spectrum(sys, u, v, params.mu);
    ParameterPoint layer = params;
    layer.eps = 0.0;
    return dense_eigenvalues(jacobian_u(sys, State{0.0, u, v}, layer));
}

}  // namespace

std::array<Complex, 2> leading_eigenvalues(const SlowFastSystem& sys, const Vec& u, const Vec& v,
                                           const ParameterPoint& params)
{
    const CVec eigs = layer_spectrum(sys, u, v, params);
    const Complex nan(std::nan(""), std::nan(""));
    return {eigs.size() > 0 ? eigs[0] : nan, eigs.size() > 1 ? eigs[1] : nan};
}

Complex critical_eigenvalue(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params)
{
    const CVec eigs = layer_spectrum(sys, u, v, params);
    require(eigs.size() > 0, ErrorKind::contract, "empty spectrum");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < eigs.size(); ++i)
        if (std::abs(eigs[i]) < std::abs(eigs[best])) best = i;
    return eigs[best];
}

namespace {

struct Problem {
    const SlowFastSystem& sys;
    ParameterPoint layer;
    Vec vbase;
    int p;
    int n;

    Vec slow(double lam) const
    {
        Vec v = vbase;
        v[p] = lam;
        return v;
    }
    Vec residual(const Vec& y) const { return sys.fast(y.head(n), slow(y[n]), layer); }
    Mat jacobian(const Vec& y) const
    {
        const State st{0.0, y.head(n), slow(y[n])};
        Mat j(n, n + 1);
        j.leftCols(n) = jacobian_u(sys, st, layer);
        j.col(n) = jacobian_v(sys, st, layer).col(p);
        return j;
    }
    double dot(const Vec& a, const Vec& b) const { return a.head(n).dot(b.head(n)) / n + a[n] * b[n]; }
    double norm(const Vec& a) const { return std::sqrt(dot(a, a)); }
    Eigen::RowVectorXd constraint_row(const Vec& t) const
    {
        Eigen::RowVectorXd r(n + 1);
        r.head(n) = t.head(n).transpose() / n;
        r[n] = t[n];
        return r;
    }
};

struct Corrected {
    Vec y;
    Vec tangent;
    bool ok = false;
};

// Solves F(y) = 0 with <dir, y - anchor> = s, starting from anchor + s dir.
Corrected correct(const Problem& pb, const Vec& anchor, const Vec& dir, double s, const NewtonOptions& opts)
{
    Corrected out;
    Vec y = anchor + s * dir;
    Mat bordered(pb.n + 1, pb.n + 1);
    const Eigen::RowVectorXd row = pb.constraint_row(dir);
    Eigen::PartialPivLU<Mat> lu;
    for (int it = 0; it < 12; ++it) {
        Vec f;
        try {
            f = pb.residual(y);
        } catch (const Error&) {
            return out;
        }
        const double g = pb.dot(dir, y - anchor) - s;
        const double res = f.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(res)) return out;
        bordered.topRows(pb.n) = pb.jacobian(y);
        bordered.row(pb.n) = row;
        lu.compute(bordered);
        if (res <= opts.tol && std::abs(g) <= 1e-12) {
            Vec rhs = Vec::Zero(pb.n + 1);
            rhs[pb.n] = 1.0;
            Vec t = lu.solve(rhs);
            t /= pb.norm(t);
            if (pb.dot(t, dir) < 0) t = -t;
            out.y = y;
            out.tangent = t;
            out.ok = t.allFinite();
            return out;
        }
        Vec rhs(pb.n + 1);
        rhs.head(pb.n) = -f;
        rhs[pb.n] = -g;
        const Vec dy = lu.solve(rhs);
        if (!dy.allFinite()) return out;
        y += dy;
    }
    return out;
}

void turing_test(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params, int n_max,
                 double& value, int& mode)
{
    const auto& hs = *sys.homogeneous();
    const Vec uh = homogeneous_values(sys, u);
    value = -std::numeric_limits<double>::infinity();
    mode = -1;
    const int nm = std::min(n_max, hs.grid.mode_count() - 1);
    for (int n = 1; n <= nm; ++n) {
        const Mat m = mode_matrix(hs, uh, v, params.mu, n);
        double re;
        if (m.rows() == 1) {
            re = m(0, 0);
        } else if (m.rows() == 2) {
            const double tr = m.trace(), det = m.determinant(), disc = tr * tr - 4 * det;
            re = disc >= 0 ? 0.5 * (tr + std::sqrt(disc)) : 0.5 * tr;
        } else {
            re = dense_eigenvalues(m)[0].real();
        }
        if (re > value) {
            value = re;
            mode = n;
        }
    }
}

BranchPoint make_point(const Problem& pb, const Vec& y, const Vec& tangent, double s, const ContinuationOptions& o)
{
    BranchPoint bp;
    bp.u = y.head(pb.n);
    bp.v = y[pb.n];
    bp.s = s;
    bp.tangent = tangent;
    bp.tangent_v = tangent[pb.n];
    const Vec v = pb.slow(bp.v);
    bp.leading = leading_eigenvalues(pb.sys, bp.u, v, pb.layer);
    const double re = bp.leading[0].real();
    bp.stability = std::abs(re) <= o.centre_tol ? Stability::centre : (re > 0 ? Stability::unstable : Stability::stable);
    bp.homogeneous = is_homogeneous(pb.sys, bp.u);
    if (bp.homogeneous) turing_test(pb.sys, bp.u, v, pb.layer, o.turing_modes, bp.turing_test, bp.turing_mode);
    return bp;
}

std::optional<double> hopf_test(const BranchPoint& p)
{
    for (const auto& l : p.leading)
        if (std::isfinite(l.real()) && std::abs(l.imag()) > 1e-6) return l.real();
    return std::nullopt;
}

}  // namespace

Branch continue_branch(const SlowFastSystem& sys, const Vec& u0, const Vec& v0, double v_end,
                       const ParameterPoint& params, const ContinuationOptions& opts)
{
    require(opts.slow_index >= 0 && opts.slow_index < sys.m_slow(), ErrorKind::contract, "slow_index out of range");
    require(opts.ds > 0 && opts.ds_min > 0 && opts.ds_max >= opts.ds_min, ErrorKind::contract,
            "invalid continuation step bounds");
    ParameterPoint layer = params;
    layer.eps = 0.0;
    const int n = sys.n_fast(), p = opts.slow_index;
    Problem pb{sys, layer, v0, p, n};
    const double v_start = v0[p];
    const double vmin = std::min(v_start, v_end), vmax = std::max(v_start, v_end);
    const double direction = v_end >= v_start ? 1.0 : -1.0;

    Branch br;
    br.v_base = v0;
    br.slow_index = p;

    Vec y(n + 1);
    y.head(n) = newton_steady(sys, u0, v0, layer, opts.newton);
    y[n] = v_start;

    // Initial tangent from the bordered system with the parameter row.
    Vec dir = Vec::Zero(n + 1);
    dir[n] = direction;
    {
        Mat b(n + 1, n + 1);
        b.topRows(n) = pb.jacobian(y);
        b.row(n) = pb.constraint_row(dir);
        Vec rhs = Vec::Zero(n + 1);
        rhs[n] = 1.0;
        Vec t = Eigen::PartialPivLU<Mat>(b).solve(rhs);
        if (t.allFinite()) dir = t / pb.norm(t);
        if (dir[n] * direction < 0) dir = -dir;
    }
    br.points.push_back(make_point(pb, y, dir, 0.0, opts));

    double ds = std::clamp(opts.ds, opts.ds_min, opts.ds_max);
    double s = 0.0;
    int successes = 0;
    while (static_cast<int>(br.points.size()) < opts.max_points) {
        Corrected c = correct(pb, y, dir, ds, opts.newton);
        double step = c.ok ? pb.norm(c.y - y) : 0.0;
        if (!c.ok || step > opts.ds_max * (1.0 + 1e-9)) {
            ds *= 0.5;
            successes = 0;
            if (ds < opts.ds_min) {
                br.truncated = true;
                std::ostringstream msg;
                msg << "step size underflow at v=" << y[n] << " after " << br.points.size() << " points";
                br.diagnostic = msg.str();
                break;
            }
            continue;
        }
        const double lam = c.y[n];
        if (lam > vmax || lam < vmin) {
            // Close the branch exactly on the boundary.
            const double bound = lam > vmax ? vmax : vmin;
            const double frac = (bound - y[n]) / (lam - y[n]);
            Vec yb = y + frac * (c.y - y);
            try {
                yb.head(n) = newton_steady(sys, yb.head(n), pb.slow(bound), layer, opts.newton);
                yb[n] = bound;
                s += pb.norm(yb - y);
                br.points.push_back(make_point(pb, yb, c.tangent, s, opts));
            } catch (const Error&) {
            }
            break;
        }
        s += step;
        const Vec secant = (c.y - y) / step;
        y = c.y;
        br.points.push_back(make_point(pb, y, c.tangent, s, opts));
        dir = secant;
        if (++successes >= 5) {
            ds = std::min(opts.ds_max, 2.0 * ds);
            successes = 0;
        }
    }
    if (opts.detect && br.points.size() >= 2) br.events = detect_bifurcations(sys, br, params, opts);
    return br;
}

namespace {

struct Located {
    Vec y;
    Vec tangent;
};

// Point at arclength offset sigma from point i along the chord to i+1.
std::optional<Located> point_on_chord(const Problem& pb, const Vec& yi, const Vec& chord, double sigma,
                                      const NewtonOptions& nopt)
{
    Corrected c = correct(pb, yi, chord, sigma, nopt);
    if (!c.ok) return std::nullopt;
    return Located{c.y, c.tangent};
}

Vec stack(const Problem& pb, const BranchPoint& bp)
{
    Vec y(pb.n + 1);
    y << bp.u, bp.v;
    return y;
}

}  // namespace

std::vector<BifurcationEvent> detect_bifurcations(const SlowFastSystem& sys, const Branch& branch,
                                                  const ParameterPoint& params, const ContinuationOptions& opts)
{
    require(branch.points.size() >= 2, ErrorKind::precondition, "branch needs at least two points");
    ParameterPoint layer = params;
    layer.eps = 0.0;
    const int n = sys.n_fast();
    Problem pb{sys, layer, branch.v_base, branch.slow_index, n};
    std::vector<BifurcationEvent> events;

    for (std::size_t i = 0; i + 1 < branch.points.size(); ++i) {
        const BranchPoint& a = branch.points[i];
        const BranchPoint& b = branch.points[i + 1];
        const Vec ya = stack(pb, a), yb = stack(pb, b);
        const double len = pb.norm(yb - ya);
        if (!(len > 0)) continue;
        const Vec chord = (yb - ya) / len;

        auto localize = [&](EventKind kind, double fa, double fb,
                             const std::function<std::optional<double>(const Located&)>& test) {
            double sa = 0.0, sb = len, va = a.v, vb = b.v;
            int side = 0;
            Located best{yb, b.tangent};
            bool have = false;
            for (int it = 0; it < 80; ++it) {
                const double sc = sb - fb * (sb - sa) / (fb - fa);
                auto loc = point_on_chord(pb, ya, chord, sc, opts.newton);
                if (!loc) break;
                auto fc = test(*loc);
                if (!fc) break;
                best = *loc;
                have = true;
                const double vc = loc->y[n];
                if (*fc == 0.0) {
                    sa = sb = sc;
                    va = vb = vc;
                    break;
                }
                if ((*fc > 0) == (fb > 0)) {
                    sb = sc;
                    fb = *fc;
                    vb = vc;
                    if (side == 1) fa *= 0.5;
                    side = 1;
                } else {
                    sa = sc;
                    fa = *fc;
                    va = vc;
                    if (side == -1) fb *= 0.5;
                    side = -1;
                }
                const bool v_tight = std::abs(vb - va) <= 1e-8;
                const bool s_tight = std::abs(sb - sa) <= 1e-11 * (1.0 + len);
                if (kind == EventKind::fold ? (s_tight || std::abs(*fc) <= 1e-13) : (v_tight || s_tight)) break;
            }
            BifurcationEvent ev;
            ev.kind = kind;
            if (!have) {
                const double w = fa / (fa - fb);
                best.y = ya + w * (yb - ya);
            }
            ev.v_value = best.y[n];
            ev.u = best.y.head(n);
            ev.localization_tol = 1e-6;
            return std::make_pair(ev, best);
        };

        // fold
        if (a.tangent_v != 0.0 && b.tangent_v != 0.0 && (a.tangent_v > 0) != (b.tangent_v > 0)) {
            auto test = [&](const Located& l) -> std::optional<double> { return l.tangent[n]; };
            auto [ev, loc] = localize(EventKind::fold, a.tangent_v, b.tangent_v, test);
            ev.eigenvalue = critical_eigenvalue(sys, ev.u, pb.slow(ev.v_value), layer);
            ev.verified = std::abs(ev.eigenvalue.imag()) <= 1e-8 &&
                          std::abs(ev.eigenvalue.real()) <= 1e-4 * (1.0 + std::abs(a.leading[0]));
            events.push_back(ev);
        }
        // hopf
        const auto ha = hopf_test(a), hb = hopf_test(b);
        if (ha && hb && (*ha > 0) != (*hb > 0)) {
            auto test = [&](const Located& l) {
                BranchPoint bp;
                bp.leading = leading_eigenvalues(sys, l.y.head(n), pb.slow(l.y[n]), layer);
                return hopf_test(bp);
            };
            auto [ev, loc] = localize(EventKind::hopf, *ha, *hb, test);
            const auto lead = leading_eigenvalues(sys, ev.u, pb.slow(ev.v_value), layer);
            ev.eigenvalue = std::abs(lead[0].imag()) > 1e-6 ? lead[0] : lead[1];
            // re-verify at v +/- 1e-4
            try {
                const double sgn = b.v > a.v ? 1.0 : -1.0;
                const Vec um = newton_steady(sys, ev.u, pb.slow(ev.v_value - sgn * 1e-4), layer, opts.newton);
                const Vec up = newton_steady(sys, ev.u, pb.slow(ev.v_value + sgn * 1e-4), layer, opts.newton);
                BranchPoint pm, pp;
                pm.leading = leading_eigenvalues(sys, um, pb.slow(ev.v_value - sgn * 1e-4), layer);
                pp.leading = leading_eigenvalues(sys, up, pb.slow(ev.v_value + sgn * 1e-4), layer);
                const auto tm = hopf_test(pm), tp = hopf_test(pp);
                ev.verified = tm && tp && (*tm > 0) != (*tp > 0);
            } catch (const Error&) {
                ev.verified = false;
            }
            events.push_back(ev);
        }
        // turing
        if (a.homogeneous && b.homogeneous && a.turing_mode > 0 && b.turing_mode > 0 &&
            (a.turing_test > 0) != (b.turing_test > 0)) {
            auto test = [&](const Located& l) -> std::optional<double> {
                if (!is_homogeneous(sys, l.y.head(n))) return std::nullopt;
                double val;
                int mode;
                turing_test(sys, l.y.head(n), pb.slow(l.y[n]), layer, opts.turing_modes, val, mode);
                return val;
            };
            auto [ev, loc] = localize(EventKind::turing, a.turing_test, b.turing_test, test);
            double val;
            int mode;
            turing_test(sys, ev.u, pb.slow(ev.v_value), layer, opts.turing_modes, val, mode);
            ev.mode_number = mode;
            ev.eigenvalue = Complex(val, 0.0);
            try {
                const double sgn = b.v > a.v ? 1.0 : -1.0;
                double vm, vp;
                int md;
                const double lo = ev.v_value - sgn * 1e-4, hi = ev.v_value + sgn * 1e-4;
                const Vec um = newton_steady(sys, ev.u, pb.slow(lo), layer, opts.newton);
                const Vec up = newton_steady(sys, ev.u, pb.slow(hi), layer, opts.newton);
                turing_test(sys, um, pb.slow(lo), layer, opts.turing_modes, vm, md);
                turing_test(sys, up, pb.slow(hi), layer, opts.turing_modes, vp, md);
                ev.verified = (vm > 0) != (vp > 0);
            } catch (const Error&) {
                ev.verified = false;
            }
            events.push_back(ev);
        }
    }
    return events;
}

Vec branch_interpolate(const Branch& branch, double v)
{
    require(!branch.points.empty(), ErrorKind::precondition, "empty branch");
    const auto& pts = branch.points;
    // Snap round-off overshoot of the end points.
    for (const BranchPoint* end : {&pts.front(), &pts.back()})
        if (std::abs(v - end->v) <= 1e-12 * (1.0 + std::abs(v))) v = end->v;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i].v, b = pts[i + 1].v;
        if ((v - a) * (v - b) <= 0.0 && a != b) {
            const double w = (v - a) / (b - a);
            return (1.0 - w) * pts[i].u + w * pts[i + 1].u;
        }
    }
    fail(ErrorKind::precondition, "slow value " + std::to_string(v) + " outside the branch range");
}

void write_branch_csv(const Branch& branch, const std::filesystem::path& path, int probe_index)
{
    std::ostringstream out;
    out << "s,v,u_norm2,u_at_probe,re_lambda1,im_lambda1,stability\n";
    for (const auto& p : branch.points) {
        const Eigen::Index k = std::clamp<Eigen::Index>(probe_index, 0, p.u.size() - 1);
        out << fmt_double(p.s) << ',' << fmt_double(p.v) << ',' << fmt_double(p.u.norm() / std::sqrt(double(p.u.size())))
            << ',' << fmt_double(p.u[k]) << ',' << fmt_double(p.leading[0].real()) << ','
            << fmt_double(p.leading[0].imag()) << ',' << to_string(p.stability) << '\n';
    }
    write_text(path, out.str());
}

nlohmann::json events_to_json(const std::vector<BifurcationEvent>& events)
{
    auto arr = nlohmann::json::array();
    for (const auto& e : events) {
        nlohmann::json j;
        j["kind"] = to_string(e.kind);
        j["v_value"] = e.v_value;
        j["mode_number"] = e.mode_number ? nlohmann::json(*e.mode_number) : nlohmann::json(nullptr);
        j["localization_tol"] = e.localization_tol;
        j["eigenvalue"] = {e.eigenvalue.real(), e.eigenvalue.imag()};
        j["verified"] = e.verified;
        arr.push_back(j);
    }
    return arr;
}

}  // namespace slowfast
