#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <mutex>
#include <thread>

#include "slowfast/config.hpp"
#include "slowfast/gspt.hpp"
#include "slowfast/io.hpp"
#include "slowfast/passage.hpp"

namespace slowfast {

const char* library_version() { return "0.1.0"; }

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

template <class F>
auto stage(const char* name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e);
    }
}

json complex_list(const CVec& z)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < z.size(); ++i) a.push_back({z[i].real(), z[i].imag()});
    return a;
}

struct Model {
    ModelPreset preset;
    SlowFastSystem sys;
    ParameterPoint params;
};

Model load_model(const RunConfig& cfg)
{
    return stage("model", [&] {
        ModelPreset p = default_preset(model_kind_from_string(cfg.preset));
        ParamMap ov = cfg.params;
        if (cfg.eps) ov["eps"] = *cfg.eps;
        if (cfg.spectrum_a) ov["b"] = *cfg.spectrum_a;
        p = with_overrides(p, ov);
        if (p.grid) p = with_grid(p, cfg.n_points, cfg.length);
        SlowFastSystem sys = build_model(p);
        return Model{p, sys, preset_parameters(p)};
    });
}

// Layer equilibrium at slow value v, continued from the model's reference.
Vec equilibrium_at(const Model& m, double v)
{
    const auto& ref = *m.sys.reference();
    Vec vv = ref.v;
    vv[0] = v;
    if (v == ref.v[0] && (ref.params.mu - m.params.mu).norm() == 0.0) return ref.u;
    return stage("equilibrium", [&] { return newton_steady(m.sys, ref.u, vv, m.params); });
}

json model_json(const Model& m)
{
    json j;
    j["model"] = m.sys.name();
    j["params"] = m.preset.physical;
    j["epsilon"] = m.params.eps;
    j["n_fast"] = m.sys.n_fast();
    j["n_points"] = m.sys.grid() ? json(m.sys.grid()->size()) : json(nullptr);
    return j;
}

json run_simulate(const RunConfig& cfg)
{
    const Model m = load_model(cfg);
    const auto& ref = *m.sys.reference();
    Vec v0 = ref.v;
    if (cfg.v_start) v0[0] = *cfg.v_start;
    const Vec u0 = equilibrium_at(m, v0[0]);
    const IntegratorOptions& io = cfg.integrator;
    Trajectory traj = stage("integrate", [&] {
        if (m.sys.delay()) {
            const double h = u0[0];
            return integrate_dde(m.sys, [h](double) { return h; }, v0, m.params, io);
        }
        return integrate(m.sys, State{0.0, u0, v0}, m.params, io);
    });
    stage("write", [&] {
        write_trajectory_csv(traj, cfg.output_dir / "trajectory.csv");
        if (m.sys.grid()) {
            const int stride = std::max<int>(1, static_cast<int>(traj.size() / 100));
            write_snapshots(traj, m.sys.grid()->nodes(), m.sys.components(), cfg.output_dir / "snapshots", stride);
        }
        return 0;
    });
    json rep = model_json(m);
    rep["integrator"] = to_string(io.method);
    rep["t_end"] = io.t_end;
    rep["snapshots"] = traj.size();
    rep["v_start"] = v0[0];
    rep["v_final"] = traj.v.back()[0];
    rep["u_final_norm2"] = traj.u.back().norm() / std::sqrt(double(traj.u.back().size()));
    return rep;
}

json run_continue(const RunConfig& cfg)
{
    const Model m = load_model(cfg);
    const auto& ref = *m.sys.reference();
    const double v_start = cfg.v_start.value_or(ref.v[0]);
    const double v_end = cfg.v_end.value_or(v_start + 1.0);
    const Vec u0 = equilibrium_at(m, v_start);
    Vec v0 = ref.v;
    v0[0] = v_start;
    ContinuationOptions opt;
    opt.ds = cfg.ds;
    opt.ds_max = cfg.ds_max;
    opt.centre_tol = cfg.centre_tol;
    const Branch br = stage("continue", [&] { return continue_branch(m.sys, u0, v0, v_end, m.params, opt); });
    stage("write", [&] {
        write_branch_csv(br, cfg.output_dir / "branch.csv", 0);
        write_json(cfg.output_dir / "events.json", events_to_json(br.events));
        return 0;
    });
    json rep = model_json(m);
    rep["v_start"] = v_start;
    rep["v_end"] = v_end;
    rep["points"] = br.points.size();
    rep["v_last"] = br.points.back().v;
    rep["truncated"] = br.truncated;
    rep["diagnostic"] = br.diagnostic;
    rep["events"] = events_to_json(br.events);
    return rep;
}

json run_spectrum(const RunConfig& cfg)
{
    const Model m = load_model(cfg);
    const auto& ref = *m.sys.reference();
    const double v = cfg.spectrum_v.value_or(ref.v[0]);
    const Vec u = equilibrium_at(m, v);
    Vec vv = ref.v;
    vv[0] = v;
    const Mat jac = jacobian_u(m.sys, State{0.0, u, vv}, m.params);
    const CVec eigs = stage("spectrum", [&] { return dense_spectrum(jac); });
    const SpectrumReport part = partition(eigs, cfg.centre_tol);
    stage("write", [&] {
        write_json(cfg.output_dir / "spectrum.json", to_json(part));
        return 0;
    });

    json rep = model_json(m);
    rep["v"] = v;
    rep["dimension"] = eigs.size();
    rep["leading"] = complex_list(eigs.head(std::min<Eigen::Index>(6, eigs.size())));
    CVec centre(static_cast<Eigen::Index>(part.sigma_c.size()));
    for (std::size_t i = 0; i < part.sigma_c.size(); ++i) centre[i] = eigs[part.sigma_c[i]];
    rep["sigma_c"] = complex_list(centre);
    rep["unstable_count"] = part.sigma_u.size();
    rep["stable_count"] = part.sigma_s.size();
    rep["gamma"] = part.gamma;
    rep["midpoint_gap"] = part.midpoint_gap;
    rep["normally_hyperbolic"] = part.normally_hyperbolic();

    if (m.preset.name == ModelKind::fhn && cfg.spectrum_a) {
        const double a = *cfg.spectrum_a;
        const int n_max = std::min(64, m.sys.grid()->size() / 2 - 1);
        const CVec closed = fhn_spectrum_closed_form(a, n_max, m.preset.physical.at("d1"));
        double worst = 0.0;
        // -a is an accumulation point of the operator spectrum, not an eigenvalue of the grid
        for (Eigen::Index i = 0; i < closed.size(); ++i) {
            if (closed[i] == Complex(-a, 0.0)) continue;
            const double err = (eigs.array() - closed[i]).abs().minCoeff();
            worst = std::max(worst, err / (1.0 + std::abs(closed[i])));
        }
        rep["closed_form"] = {{"a", a},
                              {"n_max", n_max},
                              {"hopf_frequency", std::sqrt(1.0 - a * a)},
                              {"count", closed.size() - 1},
                              {"accumulation_point", -a},
                              {"max_relative_error", worst}};
    }
    return rep;
}

json run_gspt(const RunConfig& cfg)
{
    const FoldedSingularityClass c = classify_folded_singularity(*cfg.j11, *cfg.j12, *cfg.j21);
    json rep = to_json(c);
    rep["label"] = to_string(c.label);
    return rep;
}

ExperimentOverrides experiment_overrides(const RunConfig& cfg)
{
    ExperimentOverrides ov;
    ov.eps = cfg.eps;
    ov.params = cfg.params;
    if (cfg.eps) ov.params.erase("eps");
    else if (auto it = cfg.params.find("eps"); it != cfg.params.end()) ov.eps = it->second;
    ov.n_points = cfg.n_points;
    ov.length = cfg.length;
    ov.delta = cfg.delta;
    if (cfg.integrator_given) {
        ov.method = cfg.integrator.method;
        ov.max_step = cfg.integrator.max_step;
    }
    return ov;
}

json run_experiment(const std::string& name, const fs::path& dir, const ExperimentOverrides& ov)
{
    return run_preset_experiment(experiment_from_string(name), dir, ov).report;
}

json run_all(const RunConfig& cfg)
{
    const auto names = all_experiments();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::clamp<unsigned>(cfg.threads > 0 ? cfg.threads : hw, 1, names.size());
    std::vector<json> status(names.size());
    std::atomic<std::size_t> next{0};
    const ExperimentOverrides ov = experiment_overrides(cfg);
    auto work = [&] {
        for (std::size_t i; (i = next++) < names.size();) {
            const std::string name = to_string(names[i]);
            try {
                run_preset_experiment(names[i], cfg.output_dir / name, ov);
                status[i] = {{"name", name}, {"ok", true}};
            } catch (const std::exception& e) {
                status[i] = {{"name", name}, {"ok", false}, {"error", e.what()}};
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    json rep;
    rep["presets"] = status;
    std::vector<std::string> failed;
    for (const auto& s : status)
        if (!s["ok"].get<bool>()) failed.push_back(s["name"]);
    rep["failed"] = failed;
    return rep;
}

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void dispatch(const RunConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    stage("write", [&] {
        ensure_directory(cfg.output_dir);
        write_json(cfg.output_dir / "config.resolved.json", to_json(cfg));
        return 0;
    });

    json rep;
    switch (cfg.command) {
    case Command::simulate: rep = run_simulate(cfg); break;
    case Command::continue_branch: rep = run_continue(cfg); break;
    case Command::spectrum: rep = run_spectrum(cfg); break;
    case Command::gspt_classify: rep = run_gspt(cfg); break;
    case Command::passage:
    case Command::preset:
        rep = cfg.all ? run_all(cfg) : run_experiment(cfg.preset, cfg.output_dir, experiment_overrides(cfg));
        break;
    }
    rep["command"] = to_string(cfg.command);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stage("write", [&] {
        write_json(cfg.output_dir / "report.json", rep);
        write_json(cfg.output_dir / "meta.json",
                   {{"version", library_version()}, {"started", started}, {"finished", utc_now()}, {"wall_seconds", wall}});
        return 0;
    });
    if (rep.contains("failed") && !rep["failed"].empty()) {
        std::string list;
        for (const auto& f : rep["failed"]) list += (list.empty() ? "" : ", ") + f.get<std::string>();
        throw StageError("preset", Error(ErrorKind::numerical, "presets failed: " + list));
    }
}

}  // namespace slowfast
