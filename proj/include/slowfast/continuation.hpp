#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "slowfast/spectra.hpp"

namespace slowfast {

enum class Stability { stable, unstable, centre };
const char* to_string(Stability s);

enum class EventKind { fold, hopf, turing };
const char* to_string(EventKind k);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

// Layer-problem equilibrium near u_guess at slow value v.
Vec newton_steady(const SlowFastSystem& sys, const Vec& u_guess, const Vec& v, const ParameterPoint& params,
                  const NewtonOptions& opts = {});

struct BranchPoint {
    Vec u;
    double v = 0.0;  // continued slow component
    double s = 0.0;  // arclength
    Stability stability = Stability::stable;
    std::array<Complex, 2> leading{};
    double tangent_v = 0.0;   // dv/ds of the unit tangent
    Vec tangent;              // unit tangent (u, v) in the weighted norm
    bool homogeneous = false;
    double turing_test = 0.0;  // max over n >= 1 of the dispersion relation
    int turing_mode = -1;
};

struct BifurcationEvent {
    EventKind kind = EventKind::fold;
    double v_value = 0.0;
    std::optional<int> mode_number;
    double localization_tol = 1e-6;
    Vec u;                 // equilibrium at the event
    Complex eigenvalue{};  // critical eigenvalue at the event
    bool verified = false;  // sign change re-confirmed at v_value +/- 1e-4
};

struct ContinuationOptions {
    double ds = 0.01;
    double ds_min = 1e-6;
    double ds_max = 0.1;
    int max_points = 2000;
    int slow_index = 0;  // component of v being continued
    int probe_index = 0;  // entry of u reported in the CSV
    double centre_tol = 1e-6;
    int turing_modes = 32;
    bool detect = true;
    NewtonOptions newton;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<BifurcationEvent> events;
    Vec v_base;  // full slow vector; component slow_index replaced by BranchPoint::v
    int slow_index = 0;
    bool truncated = false;
    std::string diagnostic;

    Vec slow_at(double v) const;
};

Branch continue_branch(const SlowFastSystem& sys, const Vec& u0, const Vec& v0, double v_end,
                       const ParameterPoint& params, const ContinuationOptions& opts = {});

std::vector<BifurcationEvent> detect_bifurcations(const SlowFastSystem& sys, const Branch& branch,
                                                  const ParameterPoint& params,
                                                  const ContinuationOptions& opts = {});

// Leading two eigenvalues (via the system's spectrum hook when present).
std::array<Complex, 2> leading_eigenvalues(const SlowFastSystem& sys, const Vec& u, const Vec& v,
                                           const ParameterPoint& params);

// Branch state at slow value v, linearly interpolated on the first segment
// containing v (no Newton refinement).
Vec branch_interpolate(const Branch& branch, double v);

// Eigenvalue closest to zero (hook eigenvalues when the system has a hook).
Complex critical_eigenvalue(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params);

void write_branch_csv(const Branch& branch, const std::filesystem::path& path, int probe_index);
nlohmann::json events_to_json(const std::vector<BifurcationEvent>& events);

}  // namespace slowfast
