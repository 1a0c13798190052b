#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "slowfast/continuation.hpp"
#include "slowfast/integrate.hpp"
#include "slowfast/models.hpp"

namespace slowfast {

struct DelayMeasurement {
    double v_cross = 0.0;
    double v_depart = std::numeric_limits<double>::infinity();
    double delay = std::numeric_limits<double>::infinity();
    double delta = 1e-2;
    double epsilon = 0.0;
    double t_depart = std::numeric_limits<double>::infinity();
    bool departed = false;
    bool premature = false;  // negative delay
};

// Distance from the branch at snapshot index i and time t (optional
// replacement for the normalized 2-norm, e.g. for log-amplitude states).
using TubeDistance = std::function<double(const Vec& u, const Vec& u_branch)>;

// Uses the first branch event in the direction of the drift as v_cross.
DelayMeasurement measure_delay(const SlowFastSystem& sys, const Trajectory& traj, const Branch& branch,
                               const ParameterPoint& params, double delta = 1e-2,
                               const TubeDistance& distance = {});
// Variant with an explicit crossing value and a branch lookup u_branch(v).
DelayMeasurement measure_delay(const Trajectory& traj, const std::function<Vec(double)>& u_branch,
                               double v_cross, int slow_index, double delta, double epsilon,
                               const TubeDistance& distance = {});

double normalized_distance(const Vec& a, const Vec& b);

// Solves int_{v_in}^{v_out} re_lambda = 0 for v_out > v_in.
double entry_exit_point(const std::function<double(double)>& re_lambda, double v_in, double v_max);

enum class Experiment {
    fhn_hopf,
    dde_hopf,
    nonlocal_turing,
    schnakenberg_turing_super,
    schnakenberg_turing_sub,
    nf_folded_saddle,
    nf_folded_node,
};
const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);
std::vector<Experiment> all_experiments();

struct ExperimentOverrides {
    std::optional<double> eps;
    ParamMap params;
    std::optional<int> n_points;
    std::optional<double> length;
    std::optional<double> delta;
    std::optional<double> max_step;
    std::optional<Method> method;
};

struct ExperimentResult {
    Experiment name;
    Branch branch;
    Trajectory trajectory;
    std::optional<DelayMeasurement> delay;
    nlohmann::json report;  // keyed summary, deterministic
};

ExperimentResult run_preset_experiment(Experiment name, const std::filesystem::path& out_dir,
                                       const ExperimentOverrides& overrides = {});

nlohmann::json to_json(const DelayMeasurement& d);

}  // namespace slowfast
