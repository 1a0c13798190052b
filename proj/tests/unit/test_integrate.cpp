#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "slowfast/integrate.hpp"
#include "slowfast/models.hpp"

using namespace slowfast;
using namespace sftest;

namespace {

ModelPreset on_grid(ModelKind k, int n) { return with_grid(default_preset(k), n, std::nullopt); }

// u' = -2u + sin(u) + v with the -2u part registered as linear.
SlowFastSystem split_scalar()
{
    SystemDefinition d;
    d.name = "split";
    d.n_fast = 1;
    d.m_slow = 1;
    d.rhs_fast = [](const Vec& u, const Vec& v, const Vec&, double) { return vec({-2.0 * u[0] + std::sin(u[0]) + v[0]}); };
    d.rhs_slow = [](const Vec&, const Vec&, const Vec&, double) { return vec({1.0}); };
    d.linear_part = Mat::Constant(1, 1, -1.0);
    return SlowFastSystem(std::move(d));
}

SlowFastSystem linear_dde(double tau)
{
    ModelPreset p = with_overrides(default_preset(ModelKind::dde), {{"tau", tau}, {"d", 0.0}});
    SystemDefinition d = build_model(p).definition();
    d.delay->rhs = [](double u, double ud, const Vec& v, const Vec&, double) { return v[0] * u - ud; };
    return SlowFastSystem(std::move(d));
}

}  // namespace

TEST_SUITE("integrate")
{
    TEST_CASE("layer problem rests at the reference equilibrium")
    {
        for (ModelKind k : {ModelKind::fhn, ModelKind::nonlocal_rd, ModelKind::schnakenberg}) {
            const SlowFastSystem sys = build_model(on_grid(k, 32));
            const auto& ref = *sys.reference();
            ParameterPoint p = ref.params;
            p.eps = 0.0;
            for (Method m : {Method::erk45_adaptive, Method::imex_cn_ab2}) {
                IntegratorOptions o;
                o.method = m;
                o.t_end = 5.0;
                o.max_step = 0.05;
                const Trajectory tr = integrate(sys, State{0.0, ref.u, ref.v}, p, o);
                INFO(sys.name() << " " << to_string(m));
                CHECK(max_abs(tr.u.back() - ref.u) <= 1e-8);
                CHECK(tr.times.back() == doctest::Approx(5.0));
            }
        }
    }

    TEST_CASE("imex is stable on a stiff linear term")
    {
        const SlowFastSystem sys = linear_system(Mat::Constant(1, 1, -1e3), Mat::Zero(1, 1), vec({0.0}));
        IntegratorOptions o;
        o.method = Method::imex_cn_ab2;
        o.max_step = 0.01;
        o.t_end = 1.0;
        const Trajectory tr = integrate(sys, State{0.0, vec({1.0}), vec({0.0})}, ParameterPoint{Vec(0), 0.0}, o);
        CHECK(std::abs(tr.u.back()[0]) <= 1.0);
        // explicit Euler amplification at this step
        CHECK(std::abs(1.0 - 1e3 * 0.01) > 1.0);
    }

    TEST_CASE("adaptive error decreases with tolerance")
    {
        const SlowFastSystem sys = linear_system(Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1), vec({0.0}));
        double prev = 1.0;
        for (double tol : {1e-4, 1e-7, 1e-10}) {
            IntegratorOptions o;
            o.rel_tol = o.abs_tol = tol;
            o.t_end = 3.0;
            const Trajectory tr = integrate(sys, State{0.0, vec({1.0}), vec({0.0})}, ParameterPoint{Vec(0), 0.0}, o);
            const double err = std::abs(tr.u.back()[0] - std::exp(-3.0));
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev <= 1e-9);
    }

    TEST_CASE("imex converges at second order")
    {
        const SlowFastSystem sys = split_scalar();
        const ParameterPoint p{Vec(0), 0.1};
        IntegratorOptions ref;
        ref.rel_tol = ref.abs_tol = 1e-13;
        ref.t_end = 2.0;
        const double exact = integrate(sys, State{0.0, vec({1.0}), vec({0.0})}, p, ref).u.back()[0];
        std::vector<double> errs;
        for (double h : {0.02, 0.01, 0.005}) {
            IntegratorOptions o;
            o.method = Method::imex_cn_ab2;
            o.max_step = h;
            o.t_end = 2.0;
            errs.push_back(std::abs(integrate(sys, State{0.0, vec({1.0}), vec({0.0})}, p, o).u.back()[0] - exact));
        }
        CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
        CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
    }

    TEST_CASE("constant data stays constant along trajectories")
    {
        for (ModelKind k : {ModelKind::fhn, ModelKind::nonlocal_rd, ModelKind::schnakenberg}) {
            const ModelPreset pr = on_grid(k, 64);
            const SlowFastSystem sys = build_model(pr);
            const auto& ref = *sys.reference();
            ParameterPoint p = preset_parameters(pr);
            p.eps = 0.01;
            IntegratorOptions o;
            o.method = Method::imex_cn_ab2;
            o.max_step = 0.02;
            o.t_end = 10.0;
            const Trajectory tr = integrate(sys, State{0.0, ref.u.array() * 1.05, ref.v}, p, o);
            double dev = 0.0;
            for (const Vec& u : tr.u)
                for (int c = 0; c < sys.components(); ++c) {
                    const Vec seg = u.segment(c * 64, 64);
                    dev = std::max(dev, max_abs(seg.array() - seg.mean()));
                }
            INFO(sys.name());
            CHECK(dev <= 1e-11);
        }
    }

    TEST_CASE("integration is deterministic")
    {
        const SlowFastSystem sys = build_model(on_grid(ModelKind::fhn, 32));
        const auto& ref = *sys.reference();
        ParameterPoint p = ref.params;
        p.eps = 0.005;
        IntegratorOptions o;
        o.t_end = 3.0;
        const Vec u0 = ref.u + Vec::LinSpaced(ref.u.size(), 0.0, 0.1);
        const Trajectory a = integrate(sys, State{0.0, u0, ref.v}, p, o);
        const Trajectory b = integrate(sys, State{0.0, u0, ref.v}, p, o);
        REQUIRE(a.size() == b.size());
        CHECK((a.u.back().array() == b.u.back().array()).all());
        CHECK(a.times == b.times);
        for (std::size_t i = 1; i < a.size(); ++i) CHECK(a.times[i] > a.times[i - 1]);
    }

    TEST_CASE("options are validated")
    {
        IntegratorOptions o;
        o.rel_tol = 0.5;
        CHECK_THROWS_AS(o.validate(), Error);
        o.rel_tol = 1e-15;
        CHECK_THROWS_AS(o.validate(), Error);
        o.rel_tol = 1e-6;
        o.max_step = 0.0;
        CHECK_THROWS_AS(o.validate(), Error);
        CHECK(method_from_string("imex_cn_ab2") == Method::imex_cn_ab2);
        CHECK_THROWS_AS(method_from_string("rk4"), Error);
    }

    TEST_CASE("finite-time blow-up is reported")
    {
        const SlowFastSystem sys = scalar_system([](double u, double) { return u * u; }, [](double, double) { return 0.0; });
        IntegratorOptions o;
        o.t_end = 2.0;
        try {
            integrate(sys, State{0.0, vec({1.0}), vec({0.0})}, ParameterPoint{Vec(0), 0.0}, o);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK((e.kind() == ErrorKind::stiffness || e.kind() == ErrorKind::overflow));
        }
    }

    TEST_CASE("linear dde on the first interval")
    {
        const SlowFastSystem sys = linear_dde(1.0);
        const double c = 0.7;
        IntegratorOptions o;
        o.rel_tol = o.abs_tol = 1e-12;
        o.t_end = 1.0;
        const Trajectory tr = integrate_dde(sys, [c](double) { return c; }, vec({0.0}), ParameterPoint{vec({0.0}), 0.0}, o);
        for (std::size_t i = 0; i < tr.size(); ++i) CHECK(std::abs(tr.u[i][0] - c * (1.0 - tr.times[i])) <= 1e-8);
    }

    TEST_CASE("zero history stays zero")
    {
        const ModelPreset p = with_overrides(default_preset(ModelKind::dde), {{"d", 0.0}});
        const SlowFastSystem sys = build_model(p);
        IntegratorOptions o;
        o.t_end = 20.0;
        const Trajectory tr = integrate_dde(sys, [](double) { return 0.0; }, vec({-0.5}), preset_parameters(p), o);
        for (const Vec& u : tr.u) CHECK(max_abs(u) == 0.0);
    }

    TEST_CASE("non-finite history is rejected")
    {
        const SlowFastSystem sys = build_model(default_preset(ModelKind::dde));
        IntegratorOptions o;
        CHECK_THROWS_AS(integrate_dde(sys, [](double t) { return t < -1.0 ? NAN : 0.0; }, vec({0.0}),
                                      sys.reference()->params, o),
                        Error);
        CHECK_THROWS_AS(integrate_dde(build_model(on_grid(ModelKind::fhn, 32)), [](double) { return 0.0; }, vec({0.0}),
                                      ParameterPoint{vec({0.1, 0.05}), 0.0}, o),
                        Error);
    }

    TEST_CASE("trajectory csv schema")
    {
        Trajectory tr;
        tr.times = {0.0, 1.0};
        tr.u = {vec({1.0, -1.0}), vec({2.0, 0.0})};
        tr.v = {vec({0.5}), vec({0.6})};
        const auto dir = std::filesystem::temp_directory_path() / "slowfast_unit_traj";
        write_trajectory_csv(tr, dir / "t.csv");
        std::ifstream in(dir / "t.csv");
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        CHECK(header == "t,v_1,u_norm2,u_min,u_max");
        CHECK(row == "0,0.5,1,-1,1");
        write_snapshots(tr, vec({-1.0, 1.0}), 1, dir / "snaps", 1);
        std::ifstream snap(dir / "snaps" / "snapshot_000001.csv");
        std::getline(snap, header);
        std::getline(snap, row);
        CHECK(header == "x,u_1");
        CHECK(row == "-1,2");
        std::ifstream index(dir / "snaps" / "index.csv");
        std::getline(index, header);
        std::getline(index, row);
        CHECK(header == "file,t,v_1");
        CHECK(row == "snapshot_000000.csv,0,0.5");
        std::filesystem::remove_all(dir);
    }
}
