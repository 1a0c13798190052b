#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "slowfast/integrate.hpp"
#include "slowfast/models.hpp"

namespace slowfast {

enum class Command { simulate, continue_branch, spectrum, gspt_classify, passage, preset };
const char* to_string(Command c);

struct RunConfig {
    Command command = Command::simulate;
    std::string preset;  // model name, or experiment name for passage/preset
    std::optional<double> eps;
    ParamMap params;
    std::optional<int> n_points;
    std::optional<double> length;
    IntegratorOptions integrator;
    bool integrator_given = false;
    std::optional<double> v_start, v_end;
    double ds = 0.01, ds_max = 0.1;
    std::optional<double> spectrum_a;
    std::optional<double> spectrum_v;
    double centre_tol = 1e-6;
    std::optional<double> j11, j12, j21;
    std::optional<double> delta;
    bool all = false;
    int threads = 0;
    std::filesystem::path output_dir;
};

// Strict parse of the file document merged with overrides (overrides win).
// Schema violations raise ErrorKind::config naming the key path.
RunConfig parse_config(const nlohmann::json& file_doc, const nlohmann::json& overrides);
nlohmann::json to_json(const RunConfig& cfg);

const char* library_version();

// Default output root: $SLOWFAST_OUT or ./slowfast_out.
std::filesystem::path default_output_root();

// Runs the command; errors propagate as slowfast::Error tagged with the stage.
// Writes config.resolved.json, report.json and meta.json under output_dir.
void dispatch(const RunConfig& cfg);

}  // namespace slowfast
