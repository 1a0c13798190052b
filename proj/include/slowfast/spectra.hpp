#pragma once

#include <complex>
#include <vector>

#include "json.hpp"

#include "slowfast/core.hpp"

namespace slowfast {

using Complex = std::complex<double>;

// Sorted by descending real part, ties by descending imaginary part.
CVec dense_spectrum(const Mat& a);
// Eigenvalues only, same ordering, without the residual check.
CVec dense_eigenvalues(const Mat& a);

struct EigenPair {
    Complex value;
    Eigen::VectorXcd right;
    Eigen::VectorXcd left;  // normalized so left^H right = 1
};
// Eigenpair whose eigenvalue is closest to `target`, plus the distance to the
// next closest eigenvalue (for simplicity checks).
struct NearestEigen {
    EigenPair pair;
    double separation;
};
NearestEigen nearest_eigenpair(const Mat& a, Complex target);

void sort_spectrum(CVec& eigs);

struct SpectrumReport {
    CVec eigenvalues;
    std::vector<int> sigma_u, sigma_c, sigma_s;
    double gamma = 0.0;
    // Half of the smallest hyperbolic |Re|: the midpoint of the gap.
    double midpoint_gap = 0.0;
    double centre_tol = 1e-6;

    bool normally_hyperbolic() const { return sigma_c.empty(); }
};

SpectrumReport partition(const CVec& eigs, double centre_tol = 1e-6);

CVec fhn_spectrum_closed_form(double a, int n_max, double d1 = 1.0);

// Lambert W on branch k by Halley iteration.
Complex lambert_w(Complex z, int k);
CVec dde_roots_lambert(double v, double tau, const std::vector<int>& branches);
// Roots of lambda = a + b exp(-lambda tau) on the given Lambert branches,
// sorted by descending real part.
CVec delay_characteristic_roots(double a, double b, double tau, const std::vector<int>& branches);
// Characteristic function of the scalar delay equation.
Complex dde_characteristic(double v, double tau, Complex lambda);

std::vector<double> dde_hopf_locus(double tau);

struct DispersionCurve {
    std::vector<int> modes;
    std::vector<double> re_lambda;  // leading Re per mode
    int first_unstable_mode() const;  // -1 when none with n >= 1
    double max_nonzero_mode(int* mode = nullptr) const;
};

// Leading Re lambda per cosine mode at a homogeneous equilibrium.
DispersionCurve dispersion_relation(const SlowFastSystem& sys, const Vec& u_eq, const Vec& v,
                                    const ParameterPoint& params, int n_max);

// Per-mode matrices J_reaction - k^2 D (+ w_n J_nonlocal).
Mat mode_matrix(const HomogeneousStructure& hs, const Vec& u_hom, const Vec& v, const Vec& mu, int n);
Vec homogeneous_values(const SlowFastSystem& sys, const Vec& u);

// Full spectrum of the layer Jacobian at a spatially homogeneous state,
// assembled mode by mode with multiplicities; sorted like dense_spectrum.
CVec homogeneous_spectrum(const SlowFastSystem& sys, const Vec& u, const Vec& v, const Vec& mu);

nlohmann::json to_json(const SpectrumReport& report);

}  // namespace slowfast
