#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "slowfast/models.hpp"
#include "slowfast/spectra.hpp"

namespace slowfast {

struct FlowValue {
    Vec du;
    Vec dv;
};

// Slaved reduced flow on a normally hyperbolic part of S.
FlowValue reduced_rhs(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params,
                      double tol_det = 1e-8);
FlowValue desingularized_rhs(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params);

// Adjugate and determinant of a square matrix: cofactors for n <= 3,
// singular-value reconstruction otherwise.
struct Adjugate {
    Mat adj;
    double det;
    double sigma_min;
    double sigma_max;
};
Adjugate adjugate(const Mat& a);

enum class FoldClass { normally_hyperbolic, regular_jump, folded_singularity };
const char* to_string(FoldClass c);

struct FoldPointReport {
    Vec u;
    Vec v;
    double det_DuF = 0.0;
    double sigma_min = 0.0;
    Vec condition_value;
    FoldClass classification = FoldClass::normally_hyperbolic;
};

FoldPointReport classify_fold_point(const SlowFastSystem& sys, const Vec& u, const Vec& v,
                                    const ParameterPoint& params, double tol_det = 1e-8,
                                    double tol_cond = 1e-8);

enum class FoldedLabel { folded_saddle, folded_node, folded_focus, folded_saddle_node, degenerate };
const char* to_string(FoldedLabel l);

struct FoldedSingularityClass {
    double J11 = 0.0, J12 = 0.0, J21 = 0.0;
    std::array<Complex, 2> eigenvalues{};
    FoldedLabel label = FoldedLabel::degenerate;
    // Whether the sign conditions quoted for the neural-field lemma give the
    // same answer (false cases are logged, the eigenvalue label wins).
    bool sign_rule_agrees = true;
};

FoldedSingularityClass classify_folded_singularity(double J11, double J12, double J21);

struct FoldNormalForm {
    Vec alpha;
    double beta = 0.0;
    Vec zeta;
    Vec zeta_star;
};

FoldNormalForm fold_normalform_coeffs(const SlowFastSystem& sys, const Vec& u, const Vec& v,
                                      const ParameterPoint& params, double tol_det = 1e-8);

// Second directional derivative D^2F[z, z] by Richardson-extrapolated central differences.
Vec second_directional_derivative(const SlowFastSystem& sys, const Vec& u, const Vec& v,
                                  const ParameterPoint& params, const Vec& z);

struct NfReducedResult {
    SlowFastSystem system;  // fast A; slow (B1, B2); mu = (a, b, c)
    double kappa = 0.0;     // alpha / q with q = beta / 2
    double q = 0.0;
    double xi = 0.0;        // B2 coordinate of the folded singularity
    double H0 = 0.0;        // activity at the fold
    double dH_dA = 0.0, dH_dB1 = 0.0;
    FoldedSingularityClass lemma;          // J entries from closed formulas
    FoldedSingularityClass desingularized;  // J from the assembled desingularized flow
    Mat desing_jacobian;                   // 2x2, in (A, B2), divided by q
    bool agree() const { return lemma.label == desingularized.label; }
};

// u_fold, v1_fold: fold of the neural-field layer branch; mu = (a, b, c).
NfReducedResult nf_reduced_system(const NeuralFieldData& nf, const Vec& u_fold, double v1_fold,
                                  const FoldNormalForm& nform, const Vec& mu);

nlohmann::json to_json(const FoldPointReport& r);
nlohmann::json to_json(const FoldedSingularityClass& c);

}  // namespace slowfast
