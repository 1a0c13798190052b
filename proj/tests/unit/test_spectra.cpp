#include <cmath>
#include <random>

#include "helpers.hpp"
#include "slowfast/models.hpp"
#include "slowfast/spectra.hpp"

using namespace slowfast;
using namespace sftest;

namespace {

// Newton on f(l) = v - exp(-l tau) - l from a given start.
Complex newton_root(double v, double tau, Complex l)
{
    for (int i = 0; i < 100; ++i) {
        const Complex f = v - std::exp(-l * tau) - l;
        const Complex df = tau * std::exp(-l * tau) - 1.0;
        l -= f / df;
        if (std::abs(f) < 1e-15) break;
    }
    return l;
}

// Secant iteration on g(v) = v - cos(tau sqrt(1 - v^2)).
double secant_locus(double tau, double a, double b)
{
    auto g = [tau](double v) { return v - std::cos(tau * std::sqrt(1.0 - v * v)); };
    for (int i = 0; i < 100 && std::abs(b - a) > 1e-14; ++i) {
        const double c = b - g(b) * (b - a) / (g(b) - g(a));
        a = b;
        b = c;
    }
    return b;
}

}  // namespace

TEST_SUITE("spectra")
{
    TEST_CASE("small dense spectra")
    {
        Mat d = Mat::Zero(3, 3);
        d.diagonal() << 1, -2, 3;
        const CVec e = dense_spectrum(d);
        CHECK(e[0] == Complex(3, 0));
        CHECK(e[1] == Complex(1, 0));
        CHECK(e[2] == Complex(-2, 0));
        Mat r(2, 2);
        r << 0, -2.5, 2.5, 0;
        const CVec z = dense_spectrum(r);
        CHECK(std::abs(z[0] - Complex(0, 2.5)) <= 1e-14);
        CHECK(std::abs(z[1] - Complex(0, -2.5)) <= 1e-14);
    }

    TEST_CASE("spectra of real matrices are conjugate closed")
    {
        std::mt19937 rng(5);
        std::normal_distribution<double> nd;
        Mat a(40, 40);
        for (auto& x : a.reshaped()) x = nd(rng);
        const CVec e = dense_spectrum(a);
        for (Eigen::Index i = 0; i < e.size(); ++i) CHECK((e.array() - std::conj(e[i])).abs().minCoeff() <= 1e-9);
        for (Eigen::Index i = 1; i < e.size(); ++i) CHECK(e[i - 1].real() >= e[i].real());
    }

    TEST_CASE("partition of a small set")
    {
        CVec e(3);
        e << Complex(-1, 0), Complex(0, 0), Complex(2, 0);
        const SpectrumReport r = partition(e, 1e-8);
        CHECK(r.sigma_s == std::vector<int>{0});
        CHECK(r.sigma_c == std::vector<int>{1});
        CHECK(r.sigma_u == std::vector<int>{2});
        CHECK(r.gamma == doctest::Approx(1.0 - 1e-8).epsilon(1e-15));
        CHECK_FALSE(r.normally_hyperbolic());
        CVec s(2);
        s << Complex(-1, 1), Complex(-3, 0);
        CHECK(partition(s).normally_hyperbolic());
        CHECK_THROWS_AS(partition(s, 0.0), Error);
    }

    TEST_CASE("fhn closed form")
    {
        const CVec c = fhn_spectrum_closed_form(0.1, 1);
        auto has = [&](Complex z) { return (c.array() - z).abs().minCoeff() <= 1e-6; };
        CHECK(has({0.0, 0.994987}));
        CHECK(has({0.0, -0.994987}));
        CHECK(has({-0.5, 0.916515}));
        CHECK(has({-0.5, -0.916515}));
        for (double a : {0.05, 0.3, 0.9}) CHECK((fhn_spectrum_closed_form(a, 3).array() - Complex(-a, 0)).abs().minCoeff() == 0.0);
        CHECK_THROWS_AS(fhn_spectrum_closed_form(1.2, 3), Error);
        CHECK_THROWS_AS(fhn_spectrum_closed_form(0.0, 3), Error);
    }

    TEST_CASE("fhn dense spectrum matches the closed form")
    {
        const double a = 0.1;
        ModelPreset p = with_overrides(default_preset(ModelKind::fhn), {{"b", a}, {"d1", 1.0}});
        p = with_grid(p, 128, std::nullopt);
        const SlowFastSystem sys = build_model(p);
        const auto& ref = *sys.reference();
        const CVec dense = dense_spectrum(jacobian_u(sys, State{0.0, ref.u, ref.v}, ref.params));
        const CVec closed = fhn_spectrum_closed_form(a, 128 / 4, 1.0);
        for (Eigen::Index i = 0; i < closed.size(); ++i) {
            if (closed[i] == Complex(-a, 0.0)) continue;
            CHECK((dense.array() - closed[i]).abs().minCoeff() <= 1e-6 * (1.0 + std::abs(closed[i])));
        }
        const SpectrumReport r = partition(closed);
        CHECK(r.sigma_c.size() == 2);
        CHECK(std::abs(r.midpoint_gap - a / 2) <= 1e-6);
    }

    TEST_CASE("lambert roots against newton")
    {
        const CVec r = dde_roots_lambert(0.0, 1.0, {0});
        CHECK(std::abs(r[0] - Complex(-0.31813, 1.33724)) <= 1e-5);
        const Complex oracle = newton_root(0.0, 1.0, Complex(-0.3, 1.3));
        CHECK(std::abs(r[0] - oracle) <= 1e-12);
        const CVec big = dde_roots_lambert(2.0, 1.0, {0});
        double fp = 2.0;
        for (int i = 0; i < 200; ++i) fp = 2.0 - std::exp(-fp);
        CHECK(std::abs(big[0] - Complex(fp, 0.0)) <= 1e-10);
        CHECK(fp == doctest::Approx(1.84).epsilon(0.01));
    }

    TEST_CASE("lambert roots satisfy the characteristic equation")
    {
        std::vector<int> ks;
        for (int k = -10; k <= 10; ++k) ks.push_back(k);
        for (double v : {-1.0, 0.0, 1.0})
            for (double tau : {1.0, 4.0}) {
                const CVec r = dde_roots_lambert(v, tau, ks);
                for (Eigen::Index i = 0; i < r.size(); ++i) CHECK(std::abs(dde_characteristic(v, tau, r[i])) <= 1e-10);
            }
    }

    TEST_CASE("lambert w basics")
    {
        for (Complex z : {Complex(1.0, 0.0), Complex(2.0, 0.0), Complex(-0.2, 0.3), Complex(5.0, -2.0), Complex(0.0, 2.5),
                          Complex(-0.36, 0.0), Complex(40.0, 0.0)})
            for (int k : {-2, 0, 1}) {
                const Complex w = lambert_w(z, k);
                CHECK(std::abs(w * std::exp(w) - z) <= 1e-12 * (1 + std::abs(z)));
            }
    }

    TEST_CASE("lambert w over a grid of arguments")
    {
        for (double re = -4.0; re <= 4.0; re += 0.25)
            for (double im = -4.0; im <= 4.0; im += 0.25) {
                const Complex z(re, im);
                if (std::abs(z) < 1e-12) continue;
                for (int k : {-1, 0, 1}) {
                    INFO(z << " branch " << k);
                    const Complex w = lambert_w(z, k);
                    CHECK(std::abs(w * std::exp(w) - z) <= 1e-12 * (1 + std::abs(z)));
                }
            }
    }

    TEST_CASE("hopf locus")
    {
        const auto roots = dde_hopf_locus(4.0);
        REQUIRE_FALSE(roots.empty());
        const double oracle = secant_locus(4.0, -0.8, -0.77);
        CHECK(std::abs(roots.front() - oracle) <= 1e-9);
        CHECK(std::abs(roots.front() + 0.787) <= 2e-3);
        for (double vh : roots) {
            CHECK(std::abs(vh) < 1.0);
            const CVec lead = dde_roots_lambert(vh, 4.0, {0, -1, 1, -2, 2});
            CHECK(std::abs(lead[0].real()) <= 1e-8);
        }
        for (double vh : dde_hopf_locus(0.05)) CHECK(std::abs(vh) < 1.0);
    }

    TEST_CASE("nonlocal dispersion crosses at mode two")
    {
        const ModelPreset p = default_preset(ModelKind::nonlocal_rd);
        const SlowFastSystem sys = build_model(p);
        const ParameterPoint params = preset_parameters(p);
        const Grid& g = *p.grid;
        const Vec w = kernel_fourier_coeffs(g, box_kernel_samples(g, 3.0)).coefficients;
        const double d = 0.05, l = 5.0, b = 1.0;
        const double v_star = -d * std::pow(2.0 * M_PI / l, 2) / w[2];
        CHECK(std::abs(v_star + b - 1.5064) <= 1e-3);
        for (double v : {v_star + b - 0.01, v_star + b + 0.01}) {
            const Vec u = Vec::Constant(g.size(), v - b);
            const DispersionCurve c = dispersion_relation(sys, u, vec({v}), params, 10);
            for (std::size_t n = 0; n < c.modes.size(); ++n) {
                const double k = c.modes[n] * M_PI / l;
                CHECK(std::abs(c.re_lambda[n] - (-d * k * k - (v - b) * w[n])) <= 1e-12);
            }
            CHECK(c.re_lambda[1] < 0.0);
            if (v > v_star + b) CHECK(c.first_unstable_mode() == 2);
            else CHECK(c.first_unstable_mode() == -1);
        }
    }

    TEST_CASE("dispersion agrees with the dense spectrum")
    {
        const ModelPreset p = with_grid(default_preset(ModelKind::nonlocal_rd), 64, std::nullopt);
        const SlowFastSystem sys = build_model(p);
        const double v = 1.6;
        const Vec u = Vec::Constant(64, v - 1.0);
        const ParameterPoint params = preset_parameters(p);
        const CVec dense = dense_spectrum(jacobian_u(sys, State{0.0, u, vec({v})}, params));
        const DispersionCurve c = dispersion_relation(sys, u, vec({v}), params, 32);
        for (double re : c.re_lambda) CHECK((dense.array() - Complex(re, 0.0)).abs().minCoeff() <= 1e-8);
        const CVec hom = homogeneous_spectrum(sys, u, vec({v}), params.mu);
        REQUIRE(hom.size() == dense.size());
        CHECK(max_abs((hom - dense).cwiseAbs()) <= 1e-8);
    }

    TEST_CASE("dispersion needs an equilibrium")
    {
        const ModelPreset p = with_grid(default_preset(ModelKind::nonlocal_rd), 32, std::nullopt);
        const SlowFastSystem sys = build_model(p);
        try {
            dispersion_relation(sys, Vec::Constant(32, 3.0), vec({1.5}), preset_parameters(p), 4);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::precondition);
        }
    }

    TEST_CASE("zero reaction and diffusion give a flat dispersion")
    {
        const ModelPreset p = with_overrides(with_grid(default_preset(ModelKind::nonlocal_rd), 32, std::nullopt), {{"d", 0.0}});
        const SlowFastSystem sys = build_model(p);
        // u = 0 with v = b: the local Jacobian v - b - u vanishes and the kernel term is scaled by u
        const DispersionCurve c = dispersion_relation(sys, Vec::Zero(32), vec({1.0}), preset_parameters(p), 8);
        for (double re : c.re_lambda) CHECK(re == 0.0);
    }

    TEST_CASE("nearest eigenpair")
    {
        Mat a(3, 3);
        a << 2, 1, 0, 0, 0.001, 1, 0, 0, -3;
        const NearestEigen ne = nearest_eigenpair(a, 0.0);
        CHECK(std::abs(ne.pair.value - 0.001) <= 1e-12);
        CHECK((a * ne.pair.right - ne.pair.value * ne.pair.right).norm() <= 1e-12);
        CHECK(std::abs(ne.pair.left.dot(ne.pair.right) - 1.0) <= 1e-12);
        CHECK(ne.separation == doctest::Approx(2.0).epsilon(1e-9));
    }
}
