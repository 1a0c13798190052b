#include <algorithm>
#include <cmath>
#include <numbers>

#include "builders.hpp"

namespace slowfast {

namespace {

struct PresetTable {
    ModelKind kind;
    const char* name;
    ParamMap defaults;
    ParamMap figure;
};

const std::vector<PresetTable>& table()
{
    static const std::vector<PresetTable> t = {
        {ModelKind::fhn, "fhn",
         {{"d1", 0.1}, {"b", 0.1}, {"c", 0.05}, {"eps", 5e-3}},
         {{"d1", 0.1}, {"b", 0.1}, {"c", 0.05}, {"eps", 5e-3}}},
        {ModelKind::neural_field, "neural_field",
         {{"a", 0.5}, {"b", 0.0}, {"c", 0.0}, {"kappa1", 0.5}, {"kappa2", 1.0}, {"kappa3", 0.5},
          {"kappa4", 1.0}, {"theta_gain", 50.0}, {"eps", 1e-2}},
         {{"a", 0.5}, {"b", 0.0}, {"c", 0.0}, {"kappa1", 0.5}, {"kappa2", 1.0}, {"kappa3", 0.5},
          {"kappa4", 1.0}, {"theta_gain", 50.0}}},
        {ModelKind::nonlocal_rd, "nonlocal_rd",
         {{"h", 3.0}, {"d", 0.05}, {"b", 1.0}, {"eps", 1e-4}},
         {{"h", 3.0}, {"d", 0.05}, {"b", 1.0}, {"eps", 1e-4}}},
        {ModelKind::schnakenberg, "schnakenberg",
         {{"d1", 0.26}, {"d2", 10.0}, {"c", 1.0}, {"r", 1.0}, {"h", 1.0}, {"b", 1.0}, {"eps", 1e-3}},
         {{"d1", 0.26}, {"d2", 10.0}, {"c", 1.0}, {"r", 1.0}, {"h", 1.0}, {"b", 1.0}}},
        {ModelKind::dde, "dde",
         {{"tau", 4.0}, {"d", 0.01}, {"eps", 0.01}, {"k_hist", 128.0}},
         {{"tau", 4.0}, {"d", 0.01}, {"eps", 0.01}}},
    };
    return t;
}

const PresetTable& entry(ModelKind kind)
{
    for (const auto& e : table())
        if (e.kind == kind) return e;
    fail(ErrorKind::contract, "unknown model kind");
}

std::optional<Grid> default_grid(ModelKind kind)
{
    switch (kind) {
    case ModelKind::fhn: return Grid::periodic(std::numbers::pi, 256);
    case ModelKind::neural_field: return Grid::periodic(100.0, 1024);
    case ModelKind::nonlocal_rd: return Grid::periodic(5.0, 256);
    case ModelKind::schnakenberg: return Grid::neumann(10.0, 64);
    case ModelKind::dde: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

const char* to_string(ModelKind kind) { return entry(kind).name; }

ModelKind model_kind_from_string(const std::string& name)
{
    for (const auto& e : table())
        if (name == e.name) return e.kind;
    fail(ErrorKind::config, "unknown model '" + name + "'");
}

ModelPreset default_preset(ModelKind kind)
{
    const auto& e = entry(kind);
    ModelPreset p;
    p.name = kind;
    p.grid = default_grid(kind);
    p.physical = e.defaults;
    p.figure_defaults = e.figure;
    return p;
}

std::vector<std::string> parameter_keys(ModelKind kind)
{
    std::vector<std::string> keys;
    for (const auto& [k, _] : entry(kind).defaults) keys.push_back(k);
    return keys;
}

ModelPreset with_overrides(ModelPreset preset, const ParamMap& overrides)
{
    for (const auto& [k, val] : overrides) {
        auto it = preset.physical.find(k);
        if (it == preset.physical.end())
            fail(ErrorKind::config, std::string("unknown parameter '") + k + "' for model " + to_string(preset.name));
        if (!std::isfinite(val)) fail(ErrorKind::config, "parameter '" + k + "' must be finite");
        it->second = val;
    }
    return preset;
}

ModelPreset with_grid(ModelPreset preset, std::optional<int> n_points, std::optional<double> length)
{
    if (!n_points && !length) return preset;
    if (!preset.grid) fail(ErrorKind::config, std::string("model ") + to_string(preset.name) + " has no spatial grid");
    const int n = n_points.value_or(preset.grid->size());
    const double l = length.value_or(preset.grid->half_length());
    if (n < 8 || n % 2 != 0) fail(ErrorKind::config, "grid.n_points must be an even integer >= 8");
    if (!(l > 0.0)) fail(ErrorKind::config, "grid.length must be positive");
    preset.grid = preset.grid->kind() == BoundaryKind::periodic ? Grid::periodic(l, n) : Grid::neumann(l, n);
    return preset;
}

SlowFastSystem build_model(const ModelPreset& preset)
{
    if (preset.name != ModelKind::dde && !preset.grid)
        fail(ErrorKind::config, std::string("model ") + to_string(preset.name) + " requires a grid");
    switch (preset.name) {
    case ModelKind::fhn: return detail::build_fhn(preset);
    case ModelKind::neural_field: return detail::build_neural_field(preset);
    case ModelKind::nonlocal_rd: return detail::build_nonlocal_rd(preset);
    case ModelKind::schnakenberg: return detail::build_schnakenberg(preset);
    case ModelKind::dde: return detail::build_dde(preset);
    }
    fail(ErrorKind::contract, "unknown model kind");
}

ParameterPoint preset_parameters(const ModelPreset& preset)
{
    using detail::param;
    ParameterPoint pp;
    pp.eps = param(preset, "eps");
    switch (preset.name) {
    case ModelKind::fhn: pp.mu = (Vec(2) << param(preset, "b"), param(preset, "c")).finished(); break;
    case ModelKind::neural_field:
        pp.mu = (Vec(3) << param(preset, "a"), param(preset, "b"), param(preset, "c")).finished();
        break;
    case ModelKind::dde: pp.mu = (Vec(1) << param(preset, "d")).finished(); break;
    default: pp.mu = Vec(0);
    }
    require(pp.eps >= 0.0, ErrorKind::config, "eps must be non-negative");
    return pp;
}

namespace detail {

double param(const ModelPreset& p, const char* key)
{
    auto it = p.physical.find(key);
    if (it == p.physical.end())
        fail(ErrorKind::config, std::string("missing parameter '") + key + "' for model " + to_string(p.name));
    return it->second;
}

Vec constant_field(int n, double value) { return Vec::Constant(n, value); }

}  // namespace detail

}  // namespace slowfast
