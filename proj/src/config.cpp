#include "slowfast/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "slowfast/passage.hpp"

namespace slowfast {

const char* to_string(Command c)
{
    switch (c) {
    case Command::simulate: return "simulate";
    case Command::continue_branch: return "continue";
    case Command::spectrum: return "spectrum";
    case Command::gspt_classify: return "gspt-classify";
    case Command::passage: return "passage";
    case Command::preset: return "preset";
    }
    return "?";
}

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& msg)
{
    fail(ErrorKind::config, "config error at '" + path + "': " + msg);
}

Command command_from_string(const std::string& s)
{
    for (Command c : {Command::simulate, Command::continue_branch, Command::spectrum, Command::gspt_classify,
                      Command::passage, Command::preset})
        if (s == to_string(c)) return c;
    bad("command", "unknown command '" + s + "'");
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) bad(path.empty() ? "<root>" : path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, _] : obj.items())
        if (!ok.count(k)) bad(path.empty() ? k : path + "." + k, "unknown key");
}

double number(const json& j, const std::string& path)
{
    if (!j.is_number()) bad(path, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) bad(path, "must be finite");
    return x;
}

double positive(const json& j, const std::string& path)
{
    const double x = number(j, path);
    if (!(x > 0.0)) bad(path, "must be positive");
    return x;
}

int integer(const json& j, const std::string& path, int min_value)
{
    if (!j.is_number_integer()) bad(path, "expected an integer");
    const long long x = j.get<long long>();
    if (x < min_value || x > 1'000'000'000) bad(path, "must be an integer >= " + std::to_string(min_value));
    return static_cast<int>(x);
}

std::string string(const json& j, const std::string& path)
{
    if (!j.is_string()) bad(path, "expected a string");
    return j.get<std::string>();
}

// Model kind whose parameters a preset name refers to.
std::optional<ModelKind> model_of(const std::string& preset)
{
    for (ModelKind k : {ModelKind::fhn, ModelKind::neural_field, ModelKind::nonlocal_rd, ModelKind::schnakenberg,
                        ModelKind::dde})
        if (preset == to_string(k)) return k;
    static const std::pair<const char*, ModelKind> experiments[] = {
        {"fhn_hopf", ModelKind::fhn},
        {"dde_hopf", ModelKind::dde},
        {"nonlocal_turing", ModelKind::nonlocal_rd},
        {"schnakenberg_turing_super", ModelKind::schnakenberg},
        {"schnakenberg_turing_sub", ModelKind::schnakenberg},
        {"nf_folded_saddle", ModelKind::neural_field},
        {"nf_folded_node", ModelKind::neural_field},
    };
    for (const auto& [name, kind] : experiments)
        if (preset == name) return kind;
    return std::nullopt;
}

bool is_experiment(const std::string& preset)
{
    for (Experiment e : all_experiments())
        if (preset == to_string(e)) return true;
    return false;
}

}  // namespace

RunConfig parse_config(const json& file_doc, const json& overrides)
{
    json doc = file_doc.is_null() ? json::object() : file_doc;
    if (!doc.is_object()) bad("<root>", "config file must hold a JSON object");
    if (!overrides.is_null()) {
        if (!overrides.is_object()) bad("<root>", "overrides must be a JSON object");
        doc.merge_patch(overrides);
    }
    only_keys(doc, "", {"command", "preset", "eps", "params", "grid", "integrator", "continuation", "spectrum", "gspt",
                        "passage", "all", "threads", "output_dir"});
    if (!doc.contains("command")) bad("command", "missing (usage: one of simulate, continue, spectrum, gspt-classify, passage, preset)");

    RunConfig cfg;
    cfg.command = command_from_string(string(doc["command"], "command"));
    if (doc.contains("preset")) cfg.preset = string(doc["preset"], "preset");
    if (doc.contains("eps")) {
        const double e = number(doc["eps"], "eps");
        if (e < 0.0) bad("eps", "must be non-negative");
        cfg.eps = e;
    }
    if (doc.contains("params")) {
        const json& p = doc["params"];
        if (!p.is_object()) bad("params", "expected an object");
        for (const auto& [k, val] : p.items()) cfg.params[k] = number(val, "params." + k);
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        only_keys(g, "grid", {"n_points", "length"});
        if (g.contains("n_points")) cfg.n_points = integer(g["n_points"], "grid.n_points", 4);
        if (g.contains("length")) cfg.length = positive(g["length"], "grid.length");
    }
    if (doc.contains("integrator")) {
        const json& in = doc["integrator"];
        only_keys(in, "integrator", {"method", "rel_tol", "abs_tol", "max_step", "t_end", "dense_every"});
        cfg.integrator_given = true;
        IntegratorOptions& o = cfg.integrator;
        if (in.contains("method")) {
            try {
                o.method = method_from_string(string(in["method"], "integrator.method"));
            } catch (const Error& e) {
                bad("integrator.method", e.what());
            }
        }
        if (in.contains("rel_tol")) o.rel_tol = positive(in["rel_tol"], "integrator.rel_tol");
        if (in.contains("abs_tol")) o.abs_tol = positive(in["abs_tol"], "integrator.abs_tol");
        if (in.contains("max_step")) o.max_step = positive(in["max_step"], "integrator.max_step");
        if (in.contains("t_end")) o.t_end = positive(in["t_end"], "integrator.t_end");
        if (in.contains("dense_every")) o.dense_every = integer(in["dense_every"], "integrator.dense_every", 1);
        try {
            o.validate();
        } catch (const Error& e) {
            bad("integrator", e.what());
        }
    }
    if (doc.contains("continuation")) {
        const json& c = doc["continuation"];
        only_keys(c, "continuation", {"v_start", "v_end", "ds", "ds_max"});
        if (c.contains("v_start")) cfg.v_start = number(c["v_start"], "continuation.v_start");
        if (c.contains("v_end")) cfg.v_end = number(c["v_end"], "continuation.v_end");
        if (c.contains("ds")) cfg.ds = positive(c["ds"], "continuation.ds");
        if (c.contains("ds_max")) cfg.ds_max = positive(c["ds_max"], "continuation.ds_max");
        if (cfg.ds_max < cfg.ds) bad("continuation.ds_max", "must be >= ds");
    }
    if (doc.contains("spectrum")) {
        const json& s = doc["spectrum"];
        only_keys(s, "spectrum", {"a", "v", "centre_tol"});
        if (s.contains("a")) cfg.spectrum_a = number(s["a"], "spectrum.a");
        if (s.contains("v")) cfg.spectrum_v = number(s["v"], "spectrum.v");
        if (s.contains("centre_tol")) cfg.centre_tol = positive(s["centre_tol"], "spectrum.centre_tol");
    }
    if (doc.contains("gspt")) {
        const json& g = doc["gspt"];
        only_keys(g, "gspt", {"j11", "j12", "j21"});
        if (g.contains("j11")) cfg.j11 = number(g["j11"], "gspt.j11");
        if (g.contains("j12")) cfg.j12 = number(g["j12"], "gspt.j12");
        if (g.contains("j21")) cfg.j21 = number(g["j21"], "gspt.j21");
    }
    if (doc.contains("passage")) {
        const json& p = doc["passage"];
        only_keys(p, "passage", {"delta"});
        if (p.contains("delta")) cfg.delta = positive(p["delta"], "passage.delta");
    }
    if (doc.contains("all")) {
        if (!doc["all"].is_boolean()) bad("all", "expected a boolean");
        cfg.all = doc["all"].get<bool>();
    }
    if (doc.contains("threads")) cfg.threads = integer(doc["threads"], "threads", 0);
    if (doc.contains("output_dir")) cfg.output_dir = string(doc["output_dir"], "output_dir");

    // Command-specific requirements.
    switch (cfg.command) {
    case Command::gspt_classify:
        if (!cfg.j11 || !cfg.j12 || !cfg.j21) bad("gspt", "j11, j12 and j21 are required");
        break;
    case Command::preset:
        if (cfg.all) {
            if (!cfg.preset.empty()) bad("preset", "give either a preset name or all, not both");
            break;
        }
        [[fallthrough]];
    case Command::passage:
        if (cfg.preset.empty()) bad("preset", "missing experiment name");
        if (!is_experiment(cfg.preset)) bad("preset", "unknown experiment '" + cfg.preset + "'");
        break;
    default:
        if (cfg.preset.empty()) bad("preset", "missing model name");
        if (!model_of(cfg.preset) || is_experiment(cfg.preset)) bad("preset", "unknown model '" + cfg.preset + "'");
    }
    if (cfg.all && cfg.command != Command::preset) bad("all", "only valid for the preset command");

    // Parameter keys and grid against the model schema.
    if (cfg.command == Command::gspt_classify) {
        if (!cfg.preset.empty()) bad("preset", "not used by gspt-classify");
    }
    if (!cfg.preset.empty()) {
        const ModelKind kind = *model_of(cfg.preset);
        const auto keys = parameter_keys(kind);
        for (const auto& [k, _] : cfg.params)
            if (std::find(keys.begin(), keys.end(), k) == keys.end())
                bad("params." + k, "unknown parameter for model " + std::string(to_string(kind)));
        if (kind == ModelKind::dde && (cfg.n_points || cfg.length)) bad("grid", "the dde model has no spatial grid");
        try {
            with_grid(default_preset(kind), cfg.n_points, cfg.length);
        } catch (const Error& e) {
            bad("grid", e.what());
        }
        if (cfg.spectrum_a && kind != ModelKind::fhn) bad("spectrum.a", "only the fhn model takes a Hopf parameter");
        if (cfg.spectrum_a && !(*cfg.spectrum_a > 0.0 && *cfg.spectrum_a < 1.0)) bad("spectrum.a", "must lie in (0, 1)");
    } else if (!cfg.params.empty() || cfg.eps || cfg.n_points || cfg.length) {
        bad("params", "overrides need a single preset");
    }

    if (cfg.output_dir.empty()) {
        const std::string leaf = cfg.all ? "presets" : cfg.preset.empty() ? to_string(cfg.command) : cfg.preset;
        cfg.output_dir = default_output_root() / leaf;
    }
    return cfg;
}

nlohmann::json to_json(const RunConfig& cfg)
{
    json j;
    j["command"] = to_string(cfg.command);
    j["preset"] = cfg.preset;
    j["eps"] = cfg.eps ? json(*cfg.eps) : json(nullptr);
    j["params"] = cfg.params;
    j["grid"] = {{"n_points", cfg.n_points ? json(*cfg.n_points) : json(nullptr)},
                 {"length", cfg.length ? json(*cfg.length) : json(nullptr)}};
    const IntegratorOptions& o = cfg.integrator;
    j["integrator"] = {{"method", to_string(o.method)}, {"rel_tol", o.rel_tol},   {"abs_tol", o.abs_tol},
                       {"max_step", o.max_step},        {"t_end", o.t_end},       {"dense_every", o.dense_every},
                       {"given", cfg.integrator_given}};
    auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
    j["continuation"] = {{"v_start", opt(cfg.v_start)}, {"v_end", opt(cfg.v_end)}, {"ds", cfg.ds}, {"ds_max", cfg.ds_max}};
    j["spectrum"] = {{"a", opt(cfg.spectrum_a)}, {"v", opt(cfg.spectrum_v)}, {"centre_tol", cfg.centre_tol}};
    j["gspt"] = {{"j11", opt(cfg.j11)}, {"j12", opt(cfg.j12)}, {"j21", opt(cfg.j21)}};
    j["passage"] = {{"delta", opt(cfg.delta)}};
    j["all"] = cfg.all;
    j["threads"] = cfg.threads;
    j["output_dir"] = cfg.output_dir.string();
    return j;
}

std::filesystem::path default_output_root()
{
    const char* env = std::getenv("SLOWFAST_OUT");
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("slowfast_out");
}

}  // namespace slowfast
