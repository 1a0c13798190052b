#include <cmath>
#include <deque>

#include "slowfast/integrate.hpp"

namespace slowfast {

namespace {

// Values and derivatives at the interval ends t_j = j * dt, j >= 0, kept for
// the last k_hist + 1 intervals.
class HistoryRing {
public:
    HistoryRing(const HistoryFn& history, double dt, int k) : history_(history), dt_(dt), k_(k) {}

    void push(double u, double f)
    {
        values_.push_back(u);
        slopes_.push_back(f);
        ++count_;
        while (static_cast<int>(values_.size()) > k_ + 2) {
            values_.pop_front();
            slopes_.pop_front();
        }
    }

    // u at grid time j * dt (j may be negative: read from the history function).
    double at_node(long j) const
    {
        if (j <= 0 && count_ == 0) return history_(j * dt_);
        if (j < 0) return history_(j * dt_);
        return values_[index(j)];
    }

    // Cubic Hermite interpolation for t > 0, history function otherwise.
    double at(double t) const
    {
        if (t <= 0.0) return history_(t);
        long j = static_cast<long>(std::floor(t / dt_));
        if (j >= count_ - 1) j = count_ - 2;
        const double s = (t - j * dt_) / dt_;
        const double u0 = values_[index(j)], u1 = values_[index(j + 1)];
        const double f0 = slopes_[index(j)] * dt_, f1 = slopes_[index(j + 1)] * dt_;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * u0 + (s3 - 2 * s2 + s) * f0 + (-2 * s3 + 3 * s2) * u1 + (s3 - s2) * f1;
    }

private:
    std::size_t index(long j) const
    {
        const long first = count_ - static_cast<long>(values_.size());
        require(j >= first && j < count_, ErrorKind::contract, "history ring lookup out of range");
        return static_cast<std::size_t>(j - first);
    }

    const HistoryFn& history_;
    double dt_;
    int k_;
    std::deque<double> values_, slopes_;
    long count_ = 0;
};

}  // namespace

Trajectory integrate_dde(const SlowFastSystem& sys, const HistoryFn& history, const Vec& v0,
                         const ParameterPoint& params, const IntegratorOptions& opts)
{
    require(sys.delay().has_value(), ErrorKind::precondition, "integrate_dde needs a delay system");
    opts.validate();
    const DelaySpec& ds = *sys.delay();
    const int k = ds.k_hist, m = sys.m_slow();
    const double tau = ds.tau, dt = tau / k;
    require(v0.size() == m && params.mu.size() == sys.p_params(), ErrorKind::contract, "dimension mismatch");
    check_finite(v0, "v0");
    for (int j = 0; j <= k; ++j) {
        const double h = history(-j * dt);
        if (!std::isfinite(h))
            fail(ErrorKind::precondition, "history function is non-finite at t=" + std::to_string(-j * dt));
    }

    HistoryRing ring(history, dt, k);
    auto extended = [&](double u_now, long j_now) {
        Vec e(k + 1);
        e[0] = u_now;
        for (int i = 1; i <= k; ++i) e[i] = ring.at_node(j_now - i);
        return e;
    };
    // y = [u; v]; the slow field sees the extended state at the last node.
    long node = 0;
    Vec ext_last;
    auto rhs = [&](double t, const Vec& y) {
        Vec out(1 + m);
        out[0] = ds.rhs(y[0], ring.at(t - tau), y.tail(m), params.mu, params.eps);
        if (m > 0) {
            Vec e = ext_last;
            e[0] = y[0];
            out.tail(m) = params.eps == 0.0 ? Vec::Zero(m) : Vec(params.eps * sys.slow(e, y.tail(m), params));
        }
        if (!std::isfinite(out[0])) fail(ErrorKind::overflow, "non-finite value in du[0]");
        return out;
    };

    Vec y(1 + m);
    y[0] = history(0.0);
    y.tail(m) = v0;
    ext_last = extended(y[0], 0);
    ring.push(y[0], ds.rhs(y[0], history(-tau), v0, params.mu, params.eps));

    Trajectory tr;
    tr.dense_every = opts.dense_every;
    tr.times.push_back(0.0);
    tr.u.push_back(ext_last);
    tr.v.push_back(v0);

    DormandPrince dp(rhs, opts.rel_tol, opts.abs_tol, std::min(opts.max_step, dt));
    dp.set_step_size(std::min({opts.initial_step, opts.max_step, dt}));
    const long intervals = static_cast<long>(std::ceil(opts.t_end / dt - 1e-9));
    double t = 0.0;
    for (node = 0; node < intervals; ++node) {
        const double t_next = (node + 1) * dt;
        dp.advance(t, y, t_next);
        t = t_next;
        ring.push(y[0], rhs(t, y)[0]);
        ext_last = extended(y[0], node + 1);
        if ((node + 1) % opts.dense_every == 0 || node + 1 == intervals) {
            tr.times.push_back(t);
            tr.u.push_back(ext_last);
            tr.v.push_back(y.tail(m));
        }
        if (dp.accepted() > opts.max_steps) fail(ErrorKind::stiffness, "maximum number of steps exceeded");
    }
    return tr;
}

}  // namespace slowfast
