#include "slowfast/slowfast.h"

#include <cstring>
#include <string>

#include "slowfast/config.hpp"
#include "slowfast/gspt.hpp"
#include "slowfast/io.hpp"

using namespace slowfast;

struct sf_system {
    ModelPreset preset;
    SlowFastSystem sys;
    ParameterPoint params;
};

struct sf_config {
    RunConfig cfg;
};

namespace {

thread_local std::string last_error;

sf_status status_for(ErrorKind k)
{
    switch (k) {
    case ErrorKind::config: return SF_ERR_CONFIG;
    case ErrorKind::io: return SF_ERR_IO;
    case ErrorKind::contract:
    case ErrorKind::domain:
    case ErrorKind::precondition:
    case ErrorKind::unsupported: return SF_ERR_ARGUMENT;
    default: return SF_ERR_NUMERICAL;
    }
}

// Runs f, translating exceptions into a status and the thread-local message.
template <class F>
sf_status guarded(F&& f, bool pipeline = false)
{
    try {
        f();
        last_error.clear();
        return SF_OK;
    } catch (const Error& e) {
        last_error = e.what();
        const sf_status s = status_for(e.kind());
        if (pipeline && s != SF_ERR_CONFIG && s != SF_ERR_IO) return SF_ERR_PIPELINE;
        return s;
    } catch (const nlohmann::json::exception& e) {
        last_error = std::string("invalid JSON: ") + e.what();
        return SF_ERR_CONFIG;
    } catch (const std::exception& e) {
        last_error = e.what();
        return pipeline ? SF_ERR_PIPELINE : SF_ERR_NUMERICAL;
    }
}

void need(const void* p, const char* name)
{
    if (!p) fail(ErrorKind::contract, std::string(name) + " must not be NULL");
}

nlohmann::json parse_or_null(const char* text, const char* what)
{
    if (!text) return nullptr;
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::config, std::string(what) + " is not valid JSON: " + e.what());
    }
}

char* dup_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) fail(ErrorKind::io, "out of memory");
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

Eigen::Map<const Vec> view(const double* p, int n) { return Eigen::Map<const Vec>(p, n); }

void copy_out(const Vec& x, double* out)
{
    if (out) Eigen::Map<Vec>(out, x.size()) = x;
}

void copy_complex(const CVec& z, double* re, double* im)
{
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        re[i] = z[i].real();
        im[i] = z[i].imag();
    }
}

}  // namespace

extern "C" {

const char* sf_version(void) { return library_version(); }

const char* sf_last_error(void) { return last_error.c_str(); }

int sf_exit_code(sf_status status)
{
    switch (status) {
    case SF_OK: return 0;
    case SF_ERR_CONFIG:
    case SF_ERR_ARGUMENT: return 2;
    case SF_ERR_IO: return 3;
    default: return 1;
    }
}

sf_status sf_model_create(const char* name, const char* overrides_json, sf_system** out)
{
    return guarded([&] {
        need(name, "name");
        need(out, "out");
        *out = nullptr;
        ModelPreset p = default_preset(model_kind_from_string(name));
        const nlohmann::json ov = parse_or_null(overrides_json, "overrides");
        std::optional<int> n_points;
        std::optional<double> length;
        ParamMap params;
        if (!ov.is_null()) {
            if (!ov.is_object()) fail(ErrorKind::config, "overrides must be a JSON object");
            for (const auto& [k, val] : ov.items()) {
                if (k == "n_points") {
                    if (!val.is_number_integer()) fail(ErrorKind::config, "n_points must be an integer");
                    n_points = val.get<int>();
                } else {
                    if (!val.is_number()) fail(ErrorKind::config, "override '" + k + "' must be a number");
                    if (k == "length") length = val.get<double>();
                    else params[k] = val.get<double>();
                }
            }
        }
        p = with_overrides(p, params);
        if (n_points || length) p = with_grid(p, n_points, length);
        SlowFastSystem sys = build_model(p);
        *out = new sf_system{p, sys, preset_parameters(p)};
    });
}

void sf_model_destroy(sf_system* sys) { delete sys; }

sf_status sf_model_dims(const sf_system* sys, int* n_fast, int* m_slow, int* p_params)
{
    return guarded([&] {
        need(sys, "sys");
        if (n_fast) *n_fast = sys->sys.n_fast();
        if (m_slow) *m_slow = sys->sys.m_slow();
        if (p_params) *p_params = sys->sys.p_params();
    });
}

sf_status sf_model_reference(const sf_system* sys, double* u, double* v, double* mu, double* eps)
{
    return guarded([&] {
        need(sys, "sys");
        const auto& ref = sys->sys.reference();
        if (!ref) fail(ErrorKind::unsupported, "model has no reference equilibrium");
        copy_out(ref->u, u);
        copy_out(ref->v, v);
        copy_out(sys->params.mu, mu);
        if (eps) *eps = sys->params.eps;
    });
}

sf_status sf_eval_rhs(const sf_system* sys, const double* u, const double* v, const double* mu, double eps,
                      double* du, double* dv)
{
    return guarded([&] {
        need(sys, "sys");
        need(u, "u");
        need(v, "v");
        need(mu, "mu");
        const SlowFastSystem& s = sys->sys;
        const State st{0.0, view(u, s.n_fast()), view(v, s.m_slow())};
        const RhsValue r = eval_rhs(s, st, ParameterPoint{view(mu, s.p_params()), eps});
        copy_out(r.du, du);
        copy_out(r.dv, dv);
    });
}

sf_status sf_jacobian_u(const sf_system* sys, const double* u, const double* v, const double* mu, double eps,
                        double* jac)
{
    return guarded([&] {
        need(sys, "sys");
        need(u, "u");
        need(v, "v");
        need(mu, "mu");
        need(jac, "jac");
        const SlowFastSystem& s = sys->sys;
        const State st{0.0, view(u, s.n_fast()), view(v, s.m_slow())};
        const Mat j = jacobian_u(s, st, ParameterPoint{view(mu, s.p_params()), eps});
        Eigen::Map<Mat>(jac, j.rows(), j.cols()) = j;
    });
}

sf_status sf_dense_spectrum(int n, const double* a, double* re, double* im)
{
    return guarded([&] {
        if (n <= 0) fail(ErrorKind::contract, "n must be positive");
        need(a, "a");
        need(re, "re");
        need(im, "im");
        copy_complex(dense_spectrum(Eigen::Map<const Mat>(a, n, n)), re, im);
    });
}

sf_status sf_fhn_closed_form(double a, int n_max, double* re, double* im, int capacity, int* count)
{
    return guarded([&] {
        need(count, "count");
        const CVec z = fhn_spectrum_closed_form(a, n_max);
        *count = static_cast<int>(z.size());
        if (capacity < z.size()) fail(ErrorKind::contract, "capacity too small for " + std::to_string(z.size()) + " values");
        need(re, "re");
        need(im, "im");
        copy_complex(z, re, im);
    });
}

sf_status sf_dde_hopf_locus(double tau, double* roots, int capacity, int* count)
{
    return guarded([&] {
        need(count, "count");
        const std::vector<double> r = dde_hopf_locus(tau);
        *count = static_cast<int>(r.size());
        if (capacity < *count) fail(ErrorKind::contract, "capacity too small for " + std::to_string(r.size()) + " roots");
        if (!r.empty()) need(roots, "roots");
        std::copy(r.begin(), r.end(), roots);
    });
}

sf_status sf_dde_root(double v, double tau, int branch, double* re, double* im)
{
    return guarded([&] {
        need(re, "re");
        need(im, "im");
        const CVec z = dde_roots_lambert(v, tau, {branch});
        *re = z[0].real();
        *im = z[0].imag();
    });
}

sf_status sf_classify_folded_singularity(double j11, double j12, double j21, sf_folded_label* label, double* eig_re,
                                         double* eig_im)
{
    return guarded([&] {
        need(label, "label");
        const FoldedSingularityClass c = classify_folded_singularity(j11, j12, j21);
        *label = static_cast<sf_folded_label>(c.label);
        for (int i = 0; i < 2; ++i) {
            if (eig_re) eig_re[i] = c.eigenvalues[i].real();
            if (eig_im) eig_im[i] = c.eigenvalues[i].imag();
        }
    });
}

const char* sf_folded_label_name(sf_folded_label label)
{
    if (label < SF_FOLDED_SADDLE || label > SF_FOLDED_DEGENERATE) return "unknown";
    return to_string(static_cast<FoldedLabel>(label));
}

sf_status sf_config_resolve(const char* file_json, const char* overrides_json, sf_config** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        const RunConfig cfg = parse_config(parse_or_null(file_json, "config file"), parse_or_null(overrides_json, "overrides"));
        *out = new sf_config{cfg};
    });
}

sf_status sf_config_to_json(const sf_config* cfg, char** json)
{
    return guarded([&] {
        need(cfg, "cfg");
        need(json, "json");
        *json = dup_string(to_json(cfg->cfg).dump(2));
    });
}

void sf_config_destroy(sf_config* cfg) { delete cfg; }

sf_status sf_dispatch(const sf_config* cfg)
{
    return guarded(
        [&] {
            need(cfg, "cfg");
            dispatch(cfg->cfg);
        },
        true);
}

sf_status sf_read_file(const char* path, char** contents)
{
    return guarded([&] {
        need(path, "path");
        need(contents, "contents");
        *contents = dup_string(read_text(path));
    });
}

void sf_string_free(char* s) { std::free(s); }

}  // extern "C"
