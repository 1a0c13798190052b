#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "slowfast/slowfast.h"

using nlohmann::json;

namespace {

struct Flags {
    std::string config_path;
    std::optional<std::string> preset;
    std::optional<double> eps;
    std::vector<std::string> params;
    std::optional<int> n_points;
    std::optional<double> length;
    std::optional<std::string> method;
    std::optional<double> rel_tol, abs_tol, max_step, t_end;
    std::optional<int> dense_every;
    std::optional<double> v_start, v_end, ds, ds_max;
    std::optional<double> a, v, centre_tol;
    std::optional<double> j11, j12, j21;
    std::optional<double> delta;
    bool all = false;
    std::optional<int> threads;
    std::optional<std::string> out;
};

void add_flags(CLI::App& app, Flags& f)
{
    app.add_option("--config", f.config_path, "JSON config file");
    app.add_option("--preset", f.preset, "model or experiment name");
    app.add_option("--eps", f.eps, "time-scale ratio");
    app.add_option("--param", f.params, "model parameter override key=value")->take_all();
    app.add_option("--n-points", f.n_points, "grid points");
    app.add_option("--length", f.length, "domain half-length");
    app.add_option("--method", f.method, "erk45_adaptive or imex_cn_ab2");
    app.add_option("--rel-tol", f.rel_tol);
    app.add_option("--abs-tol", f.abs_tol);
    app.add_option("--max-step", f.max_step);
    app.add_option("--t-end", f.t_end);
    app.add_option("--dense-every", f.dense_every);
    app.add_option("--v-start", f.v_start);
    app.add_option("--v-end", f.v_end);
    app.add_option("--ds", f.ds);
    app.add_option("--ds-max", f.ds_max);
    app.add_option("--a", f.a, "fhn Hopf parameter (sets b = a)");
    app.add_option("--v", f.v, "slow value for the spectrum");
    app.add_option("--centre-tol", f.centre_tol);
    app.add_option("--j11", f.j11);
    app.add_option("--j12", f.j12);
    app.add_option("--j21", f.j21);
    app.add_option("--delta", f.delta, "departure threshold");
    app.add_flag("--all", f.all, "run every preset experiment");
    app.add_option("--threads", f.threads, "worker threads for --all");
    app.add_option("--out", f.out, "output directory");
}

template <class T>
void put(json& j, const char* section, const char* key, const std::optional<T>& x)
{
    if (!x) return;
    if (section) j[section][key] = *x;
    else j[key] = *x;
}

// Returns false on a malformed --param entry.
bool overrides_from(const Flags& f, const std::string& command, json& j, std::string& err)
{
    j = json::object();
    if (!command.empty()) j["command"] = command;
    put(j, nullptr, "preset", f.preset);
    put(j, nullptr, "eps", f.eps);
    for (const auto& kv : f.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            err = "--param expects key=value, got '" + kv + "'";
            return false;
        }
        try {
            std::size_t used = 0;
            const std::string val = kv.substr(eq + 1);
            const double x = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
            j["params"][kv.substr(0, eq)] = x;
        } catch (const std::exception&) {
            err = "--param value is not a number in '" + kv + "'";
            return false;
        }
    }
    put(j, "grid", "n_points", f.n_points);
    put(j, "grid", "length", f.length);
    put(j, "integrator", "method", f.method);
    put(j, "integrator", "rel_tol", f.rel_tol);
    put(j, "integrator", "abs_tol", f.abs_tol);
    put(j, "integrator", "max_step", f.max_step);
    put(j, "integrator", "t_end", f.t_end);
    put(j, "integrator", "dense_every", f.dense_every);
    put(j, "continuation", "v_start", f.v_start);
    put(j, "continuation", "v_end", f.v_end);
    put(j, "continuation", "ds", f.ds);
    put(j, "continuation", "ds_max", f.ds_max);
    put(j, "spectrum", "a", f.a);
    put(j, "spectrum", "v", f.v);
    put(j, "spectrum", "centre_tol", f.centre_tol);
    put(j, "gspt", "j11", f.j11);
    put(j, "gspt", "j12", f.j12);
    put(j, "gspt", "j21", f.j21);
    put(j, "passage", "delta", f.delta);
    if (f.all) j["all"] = true;
    put(j, nullptr, "threads", f.threads);
    put(j, nullptr, "output_dir", f.out);
    return true;
}

int report_failure(sf_status s)
{
    std::cerr << "slowfast: " << sf_last_error() << "\n";
    return sf_exit_code(s);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Slow-fast analysis toolkit"};
    app.set_version_flag("--version", std::string(sf_version()));
    Flags flags;
    add_flags(app, flags);

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"simulate", "integrate a model from its reference equilibrium"},
        {"continue", "continue the layer equilibrium branch in the slow variable"},
        {"spectrum", "dense layer spectrum and its partition"},
        {"gspt-classify", "classify a folded singularity from its Jacobian entries"},
        {"passage", "run a slow-passage experiment"},
        {"preset", "run one preset experiment, or all with --all"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_flags(*sub, flags);
        subs[name] = sub;
    }
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;
    if (command.empty() && flags.config_path.empty()) {
        std::cerr << app.help() << "slowfast: a command or --config is required\n";
        return 2;
    }

    char* file_text = nullptr;
    if (!flags.config_path.empty()) {
        if (sf_status s = sf_read_file(flags.config_path.c_str(), &file_text); s != SF_OK) return report_failure(s);
    }
    json overrides;
    std::string err;
    if (!overrides_from(flags, command, overrides, err)) {
        sf_string_free(file_text);
        std::cerr << "slowfast: " << err << "\n";
        return 2;
    }

    sf_config* cfg = nullptr;
    const sf_status rs = sf_config_resolve(file_text, overrides.dump().c_str(), &cfg);
    sf_string_free(file_text);
    if (rs != SF_OK) return report_failure(rs);

    if (sf_status ds = sf_dispatch(cfg); ds != SF_OK) {
        sf_config_destroy(cfg);
        return report_failure(ds);
    }
    char* resolved = nullptr;
    std::string out_dir;
    if (sf_config_to_json(cfg, &resolved) == SF_OK) {
        out_dir = json::parse(resolved)["output_dir"].get<std::string>();
        sf_string_free(resolved);
    }
    sf_config_destroy(cfg);

    char* report = nullptr;
    if (sf_status s = sf_read_file((out_dir + "/report.json").c_str(), &report); s != SF_OK) return report_failure(s);
    std::cout << report << "\n";
    sf_string_free(report);
    return 0;
}
