#include <cmath>
#include <random>

#include "helpers.hpp"
#include "slowfast/continuation.hpp"
#include "slowfast/gspt.hpp"
#include "slowfast/models.hpp"

using namespace slowfast;
using namespace sftest;

namespace {

const ParameterPoint no_params{Vec(0), 0.0};

SlowFastSystem parabola(std::function<double(double, double)> g)
{
    return scalar_system([](double u, double v) { return v - u * u; }, std::move(g), [](double u, double) { return -2.0 * u; },
                         [](double, double) { return 1.0; });
}

// y = Q^T u; F(u) = Q f(y) with f = (v - y1^2, -y2).
SlowFastSystem rotated_parabola(const Mat& q)
{
    SystemDefinition d;
    d.name = "rotated";
    d.n_fast = 2;
    d.m_slow = 1;
    d.rhs_fast = [q](const Vec& u, const Vec& v, const Vec&, double) -> Vec {
        const Vec y = q.transpose() * u;
        return q * vec({v[0] - y[0] * y[0], -y[1]});
    };
    d.rhs_slow = [](const Vec&, const Vec&, const Vec&, double) { return vec({1.0}); };
    return SlowFastSystem(std::move(d));
}

// F = (v - u1^2 - u2, u1 - 2 u2): fold at u1 = -1/4, v = -1/16.
SlowFastSystem planar_fold()
{
    SystemDefinition d;
    d.name = "planar";
    d.n_fast = 2;
    d.m_slow = 1;
    d.rhs_fast = [](const Vec& u, const Vec& v, const Vec&, double) {
        return vec({v[0] - u[0] * u[0] - u[1], u[0] - 2.0 * u[1]});
    };
    d.rhs_slow = [](const Vec& u, const Vec&, const Vec&, double) { return vec({-u[0]}); };
    return SlowFastSystem(std::move(d));
}

// Label from the roots of l^2 - J11 l - J12 J21, computed independently.
FoldedLabel oracle_label(double j11, double j12, double j21)
{
    const double p = j12 * j21;
    if (p == 0.0) return FoldedLabel::folded_saddle_node;
    const double disc = j11 * j11 + 4.0 * p;
    if (disc < 0.0) return FoldedLabel::folded_focus;
    const double r1 = 0.5 * (j11 + std::sqrt(disc)), r2 = 0.5 * (j11 - std::sqrt(disc));
    return r1 * r2 < 0.0 ? FoldedLabel::folded_saddle : FoldedLabel::folded_node;
}

}  // namespace

TEST_SUITE("gspt")
{
    TEST_CASE("reduced flow examples")
    {
        const SlowFastSystem lin = scalar_system([](double u, double v) { return -u + v; }, [](double, double) { return 1.0; });
        FlowValue f = reduced_rhs(lin, vec({0.3}), vec({0.3}), no_params);
        CHECK(f.du[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(f.dv[0] == 1.0);
        f = reduced_rhs(parabola([](double, double) { return 1.0; }), vec({1.0}), vec({1.0}), no_params);
        CHECK(f.du[0] == doctest::Approx(0.5).epsilon(1e-12));
        f = reduced_rhs(parabola([](double, double) { return 0.0; }), vec({1.0}), vec({1.0}), no_params);
        CHECK(f.du[0] == 0.0);
        CHECK(f.dv[0] == 0.0);
        CHECK_THROWS_AS(reduced_rhs(parabola([](double, double) { return 1.0; }), vec({0.0}), vec({0.0}), no_params), Error);
    }

    TEST_CASE("desingularized flow examples")
    {
        const SlowFastSystem jump = parabola([](double, double) { return 1.0; });
        for (double u : {-1.0, 0.0, 0.5}) {
            const FlowValue f = desingularized_rhs(jump, vec({u}), vec({u * u}), no_params);
            CHECK(f.du[0] == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(f.dv[0] == doctest::Approx(2.0 * u).epsilon(1e-12));
        }
        const FlowValue c = desingularized_rhs(parabola([](double u, double) { return -u; }), vec({0.0}), vec({0.0}), no_params);
        CHECK(c.du[0] == 0.0);
        CHECK(c.dv[0] == 0.0);
    }

    TEST_CASE("adjugate")
    {
        std::mt19937 rng(1);
        std::normal_distribution<double> nd;
        for (int n : {1, 2, 3, 5, 8}) {
            Mat a(n, n);
            for (auto& x : a.reshaped()) x = nd(rng);
            const Adjugate adj = adjugate(a);
            const double det = a.determinant();
            CHECK(adj.det == doctest::Approx(det).epsilon(1e-10));
            CHECK((adj.adj - det * a.inverse()).cwiseAbs().maxCoeff() <= 1e-9 * (1 + adj.adj.cwiseAbs().maxCoeff()));
        }
        // rank one deficiency: A adj(A) = 0 with adj nonzero
        Mat s(5, 5);
        for (auto& x : s.reshaped()) x = nd(rng);
        s.col(4) = s.col(0) + s.col(1);
        const Adjugate as = adjugate(s);
        CHECK(as.adj.norm() > 1e-6);
        CHECK((s * as.adj).norm() <= 1e-9 * as.adj.norm() * s.norm());
        s.col(3) = s.col(2);
        try {
            adjugate(s);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::unsupported);
        }
    }

    TEST_CASE("fold point classification")
    {
        CHECK(classify_fold_point(parabola([](double, double) { return 1.0; }), vec({0.0}), vec({0.0}), no_params).classification ==
              FoldClass::regular_jump);
        CHECK(classify_fold_point(parabola([](double u, double) { return -u; }), vec({0.0}), vec({0.0}), no_params).classification ==
              FoldClass::folded_singularity);
        const SlowFastSystem lin = scalar_system([](double u, double v) { return -u + v; }, [](double, double) { return 1.0; });
        for (double x : {-2.0, 0.0, 3.0})
            CHECK(classify_fold_point(lin, vec({x}), vec({x}), no_params).classification == FoldClass::normally_hyperbolic);
        try {
            classify_fold_point(lin, vec({1.0}), vec({0.0}), no_params);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::precondition);
        }
    }

    TEST_CASE("folded singularity examples")
    {
        FoldedSingularityClass c = classify_folded_singularity(-1.0, 1.0, -0.1);
        CHECK(c.label == FoldedLabel::folded_node);
        CHECK(c.eigenvalues[0].real() == doctest::Approx(-0.112702).epsilon(1e-5));
        CHECK(c.eigenvalues[1].real() == doctest::Approx(-0.887298).epsilon(1e-5));
        CHECK(classify_folded_singularity(0.3, 1.0, 0.5).label == FoldedLabel::folded_saddle);
        CHECK(classify_folded_singularity(-1.0, 1.0, 0.0).label == FoldedLabel::folded_saddle_node);
        CHECK(classify_folded_singularity(0.1, 1.0, -1.0).label == FoldedLabel::folded_focus);
        for (const auto& ev : c.eigenvalues) {
            const Complex r = ev * ev - c.J11 * ev - c.J12 * c.J21;
            CHECK(std::abs(r) <= 1e-12);
        }
    }

    TEST_CASE("folded singularity classifier against the root oracle")
    {
        std::mt19937 rng(2024);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        int compared = 0;
        while (compared < 1000) {
            const double j11 = u(rng), j12 = u(rng), j21 = u(rng);
            const double p = j12 * j21, disc = j11 * j11 + 4.0 * p;
            if (std::abs(p) < 1e-9 || std::abs(disc) < 1e-9) continue;
            ++compared;
            CHECK(classify_folded_singularity(j11, j12, j21).label == oracle_label(j11, j12, j21));
        }
    }

    TEST_CASE("scalar fold coefficients")
    {
        const FoldNormalForm nf = fold_normalform_coeffs(parabola([](double, double) { return 1.0; }), vec({0.0}), vec({0.0}), no_params);
        CHECK(std::abs(std::abs(nf.alpha[0]) - 1.0) <= 1e-8);
        CHECK(std::abs(nf.alpha[0] * nf.beta + 2.0) <= 1e-8);
        CHECK(std::abs(nf.zeta_star.dot(nf.zeta) - 1.0) <= 1e-12);
        CHECK(std::abs(nf.zeta.norm() - 1.0) <= 1e-12);
    }

    TEST_CASE("fold coefficients are invariant under rotation")
    {
        for (double angle : {0.3, 1.1, 2.5}) {
            Mat q(2, 2);
            q << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
            const SlowFastSystem sys = rotated_parabola(q);
            const FoldNormalForm nf = fold_normalform_coeffs(sys, vec({0.0, 0.0}), vec({0.0}), no_params);
            const Mat j = jacobian_u(sys, State{0.0, vec({0.0, 0.0}), vec({0.0})}, no_params);
            CHECK((j * nf.zeta).norm() <= 1e-8);
            CHECK((nf.zeta_star.transpose() * j).norm() <= 1e-8);
            CHECK(std::abs(nf.zeta_star.dot(nf.zeta) - 1.0) <= 1e-12);
            CHECK(std::abs(std::abs(nf.alpha[0]) - 1.0) <= 1e-6);
            CHECK(std::abs(std::abs(nf.beta) - 2.0) <= 1e-6);
            CHECK(std::abs(nf.alpha[0] * nf.beta + 2.0) <= 1e-6);
        }
    }

    TEST_CASE("non-simple zero eigenvalue is degenerate")
    {
        SystemDefinition d;
        d.name = "double";
        d.n_fast = 2;
        d.m_slow = 1;
        d.rhs_fast = [](const Vec& u, const Vec& v, const Vec&, double) { return vec({v[0] - u[0] * u[0], -u[1] * u[1]}); };
        d.rhs_slow = [](const Vec&, const Vec&, const Vec&, double) { return vec({1.0}); };
        CHECK_THROWS_AS(fold_normalform_coeffs(SlowFastSystem(std::move(d)), vec({0.0, 0.0}), vec({0.0}), no_params), Error);
        CHECK_THROWS_AS(fold_normalform_coeffs(parabola([](double, double) { return 1.0; }), vec({1.0}), vec({1.0}), no_params), Error);
    }

    TEST_CASE("branch near a fold is the normal-form parabola")
    {
        const SlowFastSystem sys = planar_fold();
        const Vec uf = vec({-0.25, -0.125});
        const double vf = -1.0 / 16.0;
        const FoldNormalForm nf = fold_normalform_coeffs(sys, uf, vec({vf}), no_params);
        ContinuationOptions opt;
        opt.ds = 1e-3;
        opt.ds_max = 2e-3;
        opt.max_points = 2000;
        const Vec u0 = newton_steady(sys, vec({0.0, 0.0}), vec({0.0}), no_params);
        const Branch br = continue_branch(sys, u0, vec({0.0}), -0.2, no_params, opt);
        // least squares B = c A^2 within a 1e-2 window of the fold
        double num = 0.0, den = 0.0;
        int used = 0;
        for (const auto& pt : br.points) {
            const double b = pt.v - vf;
            if (std::abs(b) > 1e-2) continue;
            const double a = nf.zeta_star.dot(pt.u - uf);
            num += b * a * a;
            den += a * a * a * a;
            ++used;
        }
        REQUIRE(used > 10);
        const double c_fit = num / den;
        const double c_nf = -nf.beta / (2.0 * nf.alpha[0]);
        CHECK(std::abs(c_fit - c_nf) <= 0.05 * std::abs(c_nf));
    }

    TEST_CASE("equivalence of reduced and desingularized flows")
    {
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> box(-0.3, 0.3);
        std::vector<ModelPreset> presets = {
            with_grid(default_preset(ModelKind::fhn), 8, std::nullopt),
            with_grid(default_preset(ModelKind::nonlocal_rd), 8, std::nullopt),
            with_grid(default_preset(ModelKind::schnakenberg), 8, std::nullopt),
            with_grid(default_preset(ModelKind::neural_field), 8, std::nullopt),
            with_overrides(default_preset(ModelKind::dde), {{"k_hist", 8.0}}),
        };
        for (const ModelPreset& p : presets) {
            const SlowFastSystem sys = build_model(p);
            const auto& ref = *sys.reference();
            const ParameterPoint params = preset_parameters(p);
            int done = 0, tries = 0;
            while (done < 100 && tries < 1000) {
                ++tries;
                Vec u = ref.u, v = ref.v;
                for (auto& x : u) x += box(rng);
                for (auto& x : v) x += box(rng);
                const Adjugate a = adjugate(jacobian_u(sys, State{0.0, u, v}, params));
                if (std::abs(a.det) <= 10 * 1e-8) continue;
                const FlowValue red = reduced_rhs(sys, u, v, params);
                const FlowValue des = desingularized_rhs(sys, u, v, params);
                const double scale = std::max(red.du.cwiseAbs().maxCoeff(), red.dv.cwiseAbs().maxCoeff());
                INFO(sys.name());
                CHECK(max_abs(des.du / -a.det - red.du) <= 1e-9 * scale);
                CHECK(max_abs(des.dv / -a.det - red.dv) <= 1e-9 * scale);
                ++done;
            }
            CHECK(done == 100);
        }
    }

    TEST_CASE("neural-field reduction at a fold")
    {
        const ModelPreset p = with_grid(default_preset(ModelKind::neural_field), 512, std::nullopt);
        const SlowFastSystem sys = build_model(p);
        const ParameterPoint params = preset_parameters(p);
        ContinuationOptions opt;
        opt.ds_max = 0.05;
        opt.max_points = 80;
        const Vec v0 = vec({nf_bump_threshold(p, 0.5), 0.0});
        const Branch br = continue_branch(sys, nf_bump_seed(p, 0.5), v0, 0.6, params, opt);
        const BifurcationEvent* fold = nullptr;
        for (const auto& e : br.events)
            if (e.kind == EventKind::fold && (!fold || e.v_value < fold->v_value)) fold = &e;
        REQUIRE(fold);
        const Vec vf = vec({fold->v_value, 0.0});
        const FoldNormalForm nform = fold_normalform_coeffs(sys, fold->u, vf, params);
        CHECK(std::abs(nform.alpha[0]) > 1e-4);
        CHECK(std::abs(nform.beta) > 1e-4);
        const NfReducedResult red = nf_reduced_system(neural_field_data(p), fold->u, fold->v_value, nform, params.mu);
        CHECK(red.system.n_fast() == 1);
        CHECK(red.system.m_slow() == 2);
        CHECK(red.q == doctest::Approx(nform.beta / 2));
        CHECK(red.agree());
        // b = c = 0: J11 vanishes
        CHECK(std::abs(red.lemma.J11) <= 1e-12);

        // eps = 0 freezes (B1, B2) and leaves the fold normal form
        for (double a : {-0.01, 0.02}) {
            const Vec b = vec({0.003, -0.2});
            const RhsValue r = eval_rhs(red.system, State{0.0, vec({a}), b}, ParameterPoint{params.mu, 0.0});
            CHECK(max_abs(r.dv) == 0.0);
            CHECK(r.du[0] == doctest::Approx(nform.alpha[0] * b[0] + red.q * a * a).epsilon(1e-12));
        }
    }
}
