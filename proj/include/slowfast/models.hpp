#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slowfast/core.hpp"

namespace slowfast {

enum class ModelKind { fhn, neural_field, nonlocal_rd, schnakenberg, dde };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

using ParamMap = std::map<std::string, double>;

struct ModelPreset {
    ModelKind name = ModelKind::fhn;
    std::optional<Grid> grid;
    ParamMap physical;         // values actually used
    ParamMap figure_defaults;  // caption values, never edited
};

// Preset populated with figure defaults (physical == figure_defaults) and
// the default grid for the model.
ModelPreset default_preset(ModelKind kind);

// Known parameter keys for a model (strict schema for overrides).
std::vector<std::string> parameter_keys(ModelKind kind);

// Copies a preset, applying overrides; unknown keys are a config error.
ModelPreset with_overrides(ModelPreset preset, const ParamMap& overrides);
ModelPreset with_grid(ModelPreset preset, std::optional<int> n_points, std::optional<double> length);

SlowFastSystem build_model(const ModelPreset& preset);

// Parameter vector mu and default epsilon for a preset.
ParameterPoint preset_parameters(const ModelPreset& preset);

struct SchnakenbergParams {
    double v = 1.0, c = 1.0, r = 1.0, h = 1.0, b = 1.0;
};
struct HomogeneousPair {
    double u1;
    double u2;
};
HomogeneousPair schnakenberg_homogeneous(const SchnakenbergParams& p);

std::vector<double> nf_levelset(const Grid& grid, const Vec& u, double v1);

// Homogeneous equilibria used as continuation seeds.
HomogeneousPair fhn_homogeneous(double v, double b, double c);
double dde_equilibrium(double v, double d);

// Pieces of the neural-field model needed by the fold reduction.
struct NeuralFieldData {
    Grid grid;
    Mat weights;  // W_ij = w(x_i, x_j) dx
    Vec modulation;  // column factor of W; W diag(1/modulation) is symmetric
    double gain = 50.0;
    Vec firing(const Vec& u, double v1) const;
    Vec firing_slope(const Vec& u, double v1) const;
    // Q(u, v1) = integral of the firing rate over the domain
    double activity(const Vec& u, double v1) const;
};
NeuralFieldData neural_field_data(const ModelPreset& preset);

// Bump of half-width A for the unmodulated kernel with a Heaviside rate, and
// the threshold at which it is stationary; a Newton seed for the bump branch.
Vec nf_bump_seed(const ModelPreset& preset, double half_width);
double nf_bump_threshold(const ModelPreset& preset, double half_width);

}  // namespace slowfast
