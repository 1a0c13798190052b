#include <cmath>
#include <numbers>

#include "slowfast/spectra.hpp"

namespace slowfast {

namespace {

constexpr double e_const = std::numbers::e;
const Complex two_pi_i(0.0, 2.0 * std::numbers::pi);

// Series about the branch point z = -1/e in p = sqrt(2(e z + 1)).
Complex branch_point_series(Complex p) { return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p; }

Complex asymptotic(Complex z, int k)
{
    const Complex l1 = std::log(z) + double(k) * two_pi_i;
    const Complex l2 = std::log(l1);
    return l1 - l2 + l2 / l1;
}

Complex initial_guess(Complex z, int k)
{
    const Complex p = std::sqrt(2.0 * (e_const * z + 1.0));
    const bool near_branch = std::abs(e_const * z + 1.0) < 0.5;
    const bool real_axis = z.imag() == 0.0;
    if (k == 0) {
        if (near_branch) return branch_point_series(p);
        if (std::abs(z) < 0.5) return z * (1.0 - z);
        if (std::abs(z) < 3.0 && z.real() > -0.5) {
            // Winitzki approximation
            const Complex l = std::log(1.0 + z);
            return l * (1.0 - std::log(1.0 + l) / (2.0 + l));
        }
        return asymptotic(z, 0);
    }
    if (k == -1 && real_axis && z.real() < 0.0) {
        if (z.real() >= -1.0 / e_const) {
            // real lower branch W <= -1
            if (near_branch) return branch_point_series(-std::abs(p));
            const double l1 = std::log(-z.real());
            return Complex(l1 - std::log(-l1), 0.0);
        }
        if (near_branch) return std::conj(branch_point_series(p));
        return std::conj(asymptotic(z, 0));
    }
    return asymptotic(z, k);
}

}  // namespace

Complex lambert_w(Complex z, int k)
{
    if (z == Complex(0.0, 0.0)) {
        if (k == 0) return 0.0;
        fail(ErrorKind::domain, "W_" + std::to_string(k) + "(0) is unbounded");
    }
    // Conjugate symmetry of the real-axis branches: W_{-1}(x) = conj W_0(x) for x < -1/e.
    if (k == -1 && z.imag() == 0.0 && z.real() < -1.0 / e_const) return std::conj(lambert_w(z, 0));

    Complex w = initial_guess(z, k);
    for (int it = 0; it < 100; ++it) {
        const Complex ew = std::exp(w);
        const Complex f = w * ew - z;
        const Complex wp1 = w + 1.0;
        Complex step;
        if (std::abs(wp1) < 1e-300) {
            step = f / ew;
        } else {
            step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        }
        w -= step;
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) break;
        if (std::abs(step) <= 1e-14 * (1.0 + std::abs(w))) {
            if (z.imag() == 0.0 && (k == 0 || k == -1) && std::abs(w.imag()) < 1e-14 * (1.0 + std::abs(w)))
                w.imag(0.0);
            return w;
        }
    }
    fail(ErrorKind::numerical, "Halley iteration for Lambert W branch " + std::to_string(k) + " did not converge");
}

}  // namespace slowfast
