#include <cmath>
#include <random>

#include "helpers.hpp"
#include "slowfast/continuation.hpp"
#include "slowfast/models.hpp"

using namespace slowfast;
using namespace sftest;

namespace {

ModelPreset on_grid(ModelKind k, int n)
{
    return with_grid(default_preset(k), n, std::nullopt);
}

Vec random_field(int size, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vec u(size);
    for (auto& x : u) x = d(rng);
    return u;
}

void check_equivariance(const SlowFastSystem& sys, const Vec& v, const ParameterPoint& p, bool shifts, bool reflect)
{
    const int q = sys.components();
    const Vec u = random_field(sys.n_fast(), 11) * 0.5;
    const Vec f = eval_rhs(sys, State{0.0, u, v}, p).du;
    const double scale = 1.0 + max_abs(f);
    if (shifts)
        for (int s : {1, 3, -7}) {
            const Vec lhs = eval_rhs(sys, State{0.0, periodic_shift(u, q, s), v}, p).du;
            CHECK(max_abs(lhs - periodic_shift(f, q, s)) <= 1e-12 * scale);
        }
    if (reflect) {
        const Vec lhs = eval_rhs(sys, State{0.0, periodic_reflect(u, q), v}, p).du;
        CHECK(max_abs(lhs - periodic_reflect(f, q)) <= 1e-12 * scale);
    }
}

}  // namespace

TEST_SUITE("models")
{
    TEST_CASE("figure defaults")
    {
        const ModelPreset fhn = default_preset(ModelKind::fhn);
        CHECK(fhn.figure_defaults.at("d1") == 0.1);
        CHECK(fhn.figure_defaults.at("b") == 0.1);
        CHECK(fhn.figure_defaults.at("c") == 0.05);
        const ModelPreset dde = default_preset(ModelKind::dde);
        CHECK(dde.figure_defaults.at("eps") == 0.01);
        CHECK(dde.figure_defaults.at("tau") == 4.0);
        CHECK(dde.figure_defaults.at("d") == 0.01);
        CHECK_FALSE(dde.grid);
        const ModelPreset nl = default_preset(ModelKind::nonlocal_rd);
        CHECK(nl.figure_defaults.at("h") == 3.0);
        CHECK(nl.figure_defaults.at("d") == 0.05);
        CHECK(nl.figure_defaults.at("b") == 1.0);
        CHECK(nl.grid->half_length() == 5.0);
        const ModelPreset nf = default_preset(ModelKind::neural_field);
        CHECK(nf.figure_defaults.at("theta_gain") == 50.0);
        CHECK(nf.grid->size() == 1024);
    }

    TEST_CASE("model dimensions")
    {
        for (ModelKind k : {ModelKind::fhn, ModelKind::nonlocal_rd, ModelKind::schnakenberg}) {
            const SlowFastSystem sys = build_model(on_grid(k, 32));
            CHECK(sys.m_slow() == 1);
            CHECK(sys.linear_part());
        }
        CHECK(build_model(on_grid(ModelKind::neural_field, 32)).m_slow() == 2);
        CHECK(build_model(default_preset(ModelKind::dde)).m_slow() == 1);
    }

    TEST_CASE("overrides are strict")
    {
        CHECK_THROWS_AS(with_overrides(default_preset(ModelKind::fhn), {{"nope", 1.0}}), Error);
        const ModelPreset p = with_overrides(default_preset(ModelKind::fhn), {{"b", 0.3}});
        CHECK(p.physical.at("b") == 0.3);
        CHECK(p.figure_defaults.at("b") == 0.1);
        CHECK_THROWS_AS(with_grid(default_preset(ModelKind::dde), 64, std::nullopt), Error);
        CHECK_THROWS_AS(with_grid(default_preset(ModelKind::fhn), 7, std::nullopt), Error);
    }

    TEST_CASE("missing parameter names the key")
    {
        ModelPreset p = default_preset(ModelKind::schnakenberg);
        p.physical.erase("d2");
        try {
            build_model(p);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::config);
            CHECK(std::string(e.what()).find("d2") != std::string::npos);
        }
    }

    TEST_CASE("schnakenberg homogeneous closed form")
    {
        HomogeneousPair e = schnakenberg_homogeneous({1.0, 1.0, 1.0, 1.0, 1.0});
        CHECK(e.u1 == 1.0);
        CHECK(e.u2 == 1.0);
        e = schnakenberg_homogeneous({1.0, 1.0, 1.0, 1.0, 0.0});
        CHECK(e.u1 == 0.0);
        CHECK(e.u2 == 0.0);
        e = schnakenberg_homogeneous({2.0, 1.0, 1.0, 1.0, 1.0});
        CHECK(e.u1 == 1.0);
        CHECK(std::abs(e.u2 - 2.0 / 3.0) < 1e-15);
        CHECK_THROWS_AS(schnakenberg_homogeneous({1.0, 1.0, 0.0, 1.0, 1.0}), Error);
    }

    TEST_CASE("schnakenberg residual over random parameters")
    {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> d(0.2, 3.0);
        for (int i = 0; i < 50; ++i) {
            const SchnakenbergParams p{d(rng), d(rng), d(rng), d(rng), d(rng)};
            const HomogeneousPair e = schnakenberg_homogeneous(p);
            const double r1 = p.v * e.u1 * e.u1 * e.u2 - (p.c + p.r) * e.u1 + p.h * e.u2;
            const double r2 = -p.v * e.u1 * e.u1 * e.u2 + p.c * e.u1 - p.h * e.u2 + p.b;
            CHECK(e.u1 == doctest::Approx(p.b / p.r).epsilon(1e-15));
            CHECK(std::abs(r1) <= 1e-12);
            CHECK(std::abs(r2) <= 1e-12);
        }
    }

    TEST_CASE("level sets")
    {
        const Grid g = Grid::periodic(4.0, 64);
        CHECK(nf_levelset(g, Vec::Constant(64, 2.0), 1.0).empty());
        const auto xs = nf_levelset(g, g.nodes(), 0.0);
        REQUIRE(xs.size() == 1);
        CHECK(std::abs(xs[0]) <= g.spacing());
    }

    TEST_CASE("neural-field bump has two symmetric interfaces")
    {
        const ModelPreset p = on_grid(ModelKind::neural_field, 512);
        const SlowFastSystem sys = build_model(p);
        const ParameterPoint params = preset_parameters(p);
        const double v1 = nf_bump_threshold(p, 2.0);
        const Vec v = vec({v1, 0.0});
        const Vec u = newton_steady(sys, nf_bump_seed(p, 2.0), v, params);
        CHECK(max_abs(sys.fast(u, v, params)) <= 1e-10);
        const auto xs = nf_levelset(*p.grid, u, v1);
        REQUIRE(xs.size() == 2);
        CHECK(std::abs(xs[0] + xs[1]) <= p.grid->spacing());
    }

    TEST_CASE("homogeneous closure")
    {
        for (ModelKind k : {ModelKind::fhn, ModelKind::nonlocal_rd, ModelKind::schnakenberg}) {
            const SlowFastSystem sys = build_model(on_grid(k, 64));
            const auto& ref = *sys.reference();
            const Vec u = ref.u.array() * 1.3 + 0.1;
            const Vec f = eval_rhs(sys, State{0.0, u, ref.v}, ref.params).du;
            const double tol = sys.grid()->kind() == BoundaryKind::periodic ? 0.0 : 1e-13;
            for (int c = 0; c < sys.components(); ++c) {
                const Vec fc = f.segment(c * 64, 64);
                INFO(sys.name());
                CHECK(max_abs(fc.array() - fc.mean()) <= tol);
            }
        }
    }

    TEST_CASE("translation and reflection equivariance")
    {
        for (ModelKind k : {ModelKind::fhn, ModelKind::nonlocal_rd}) {
            const SlowFastSystem sys = build_model(on_grid(k, 128));
            const auto& ref = *sys.reference();
            INFO(sys.name());
            check_equivariance(sys, ref.v, ref.params, true, true);
        }
        // neural field: translations need a translation-invariant kernel
        const ModelPreset nf = with_overrides(on_grid(ModelKind::neural_field, 128), {{"kappa3", 0.0}});
        const SlowFastSystem sys = build_model(nf);
        check_equivariance(sys, vec({0.3, 0.0}), preset_parameters(nf), true, true);
        const ModelPreset modulated = on_grid(ModelKind::neural_field, 128);
        check_equivariance(build_model(modulated), vec({0.3, 0.0}), preset_parameters(modulated), false, true);
    }

    TEST_CASE("dde equilibrium")
    {
        for (double v : {-1.0, -0.5, 0.3}) {
            const double u = dde_equilibrium(v, 0.01);
            CHECK(std::abs(v * u - u * u * u - u + 0.01) <= 1e-12);
        }
    }
}
