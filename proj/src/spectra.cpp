#include "slowfast/spectra.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace slowfast {

namespace {

struct GeevResult {
    CVec values;
    Eigen::MatrixXcd right, left;
};

// Column-major copy is consumed by dgeev.
GeevResult geev(const Mat& a, bool want_right, bool want_left)
{
    const lapack_int n = static_cast<lapack_int>(a.rows());
    require(a.rows() == a.cols(), ErrorKind::contract, "eigenvalue problem needs a square matrix");
    require(n <= 8192, ErrorKind::contract, "dense spectrum limited to n <= 8192");
    check_finite(a.reshaped(), "matrix");
    GeevResult out;
    out.values.resize(n);
    if (n == 0) return out;
    Mat work = a;
    Vec wr(n), wi(n);
    Mat vl(want_left ? n : 1, want_left ? n : 1), vr(want_right ? n : 1, want_right ? n : 1);
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, want_left ? 'V' : 'N', want_right ? 'V' : 'N', n,
                                          work.data(), n, wr.data(), wi.data(), vl.data(), want_left ? n : 1,
                                          vr.data(), want_right ? n : 1);
    if (info != 0) {
        fail(ErrorKind::numerical, "dgeev failed (info=" + std::to_string(info) + ") on a " + std::to_string(n) +
                                       "x" + std::to_string(n) + " matrix with norm " +
                                       std::to_string(a.lpNorm<Eigen::Infinity>()));
    }
    for (lapack_int i = 0; i < n; ++i) out.values[i] = Complex(wr[i], wi[i]);
    auto unpack = [n, &wi](const Mat& v) {
        Eigen::MatrixXcd c(n, n);
        for (lapack_int j = 0; j < n; ++j) {
            if (wi[j] != 0.0 && j + 1 < n) {
                c.col(j) = v.col(j).cast<Complex>() + Complex(0, 1) * v.col(j + 1).cast<Complex>();
                c.col(j + 1) = c.col(j).conjugate();
                ++j;
            } else {
                c.col(j) = v.col(j).cast<Complex>();
            }
        }
        return c;
    };
    if (want_right) out.right = unpack(vr);
    if (want_left) out.left = unpack(vl);
    return out;
}

bool spectrum_order(const Complex& x, const Complex& y)
{
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
}

}  // namespace

void sort_spectrum(CVec& eigs) { std::sort(eigs.data(), eigs.data() + eigs.size(), spectrum_order); }

CVec dense_spectrum(const Mat& a)
{
    GeevResult r = geev(a, true, false);
    const Eigen::Index n = r.values.size();
    if (n > 0) {
        const double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>());
        const Eigen::Index stride = std::max<Eigen::Index>(1, n / 8);
        const Eigen::MatrixXcd ac = a.cast<Complex>();
        for (Eigen::Index i = 0; i < n; i += stride) {
            const Eigen::VectorXcd v = r.right.col(i);
            const double res = (ac * v - r.values[i] * v).norm() / v.norm();
            if (!(res <= 1e-8 * scale)) {
                fail(ErrorKind::numerical, "eigenpair residual " + std::to_string(res) + " exceeds tolerance");
            }
        }
    }
    sort_spectrum(r.values);
    return r.values;
}

CVec dense_eigenvalues(const Mat& a)
{
    GeevResult r = geev(a, false, false);
    sort_spectrum(r.values);
    return r.values;
}

NearestEigen nearest_eigenpair(const Mat& a, Complex target)
{
    GeevResult r = geev(a, true, true);
    const Eigen::Index n = r.values.size();
    require(n > 0, ErrorKind::contract, "empty matrix");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
        if (std::abs(r.values[i] - target) < std::abs(r.values[best] - target)) best = i;
    double sep = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != best) sep = std::min(sep, std::abs(r.values[i] - target));
    NearestEigen out;
    out.pair.value = r.values[best];
    out.pair.right = r.right.col(best).normalized();
    Eigen::VectorXcd left = r.left.col(best);
    const Complex pairing = left.dot(out.pair.right);  // left^H right
    require(std::abs(pairing) > 1e-14, ErrorKind::degenerate, "left and right eigenvectors are orthogonal");
    out.pair.left = left / std::conj(pairing);
    out.separation = sep;
    return out;
}

SpectrumReport partition(const CVec& eigs, double centre_tol)
{
    require(centre_tol > 0.0, ErrorKind::contract, "centre_tol must be positive");
    SpectrumReport r;
    r.eigenvalues = eigs;
    r.centre_tol = centre_tol;
    double min_hyp = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        const double re = eigs[i].real();
        if (std::abs(re) <= centre_tol) {
            r.sigma_c.push_back(static_cast<int>(i));
        } else {
            (re > 0 ? r.sigma_u : r.sigma_s).push_back(static_cast<int>(i));
            min_hyp = std::min(min_hyp, std::abs(re));
        }
    }
    if (std::isfinite(min_hyp)) {
        r.gamma = std::max(0.0, min_hyp - centre_tol);
        r.midpoint_gap = 0.5 * min_hyp;
    }
    return r;
}

CVec fhn_spectrum_closed_form(double a, int n_max, double d1)
{
    if (!(a > 0.0 && a < 1.0)) fail(ErrorKind::domain, "fhn closed form needs a in (0, 1)");
    require(n_max >= 0, ErrorKind::contract, "n_max must be non-negative");
    std::vector<Complex> out;
    out.emplace_back(-a, 0.0);
    const double w = std::sqrt(1.0 - a * a);
    out.emplace_back(0.0, w);
    out.emplace_back(0.0, -w);
    for (int n = 1; n <= n_max; ++n) {
        const double m = d1 * double(n) * double(n);
        const Complex root = std::sqrt(Complex((m - 2.0 * a) * (m - 2.0 * a) - 4.0, 0.0));
        for (int sign = 0; sign < 2; ++sign) {  // modes n and -n
            out.push_back(0.5 * (-m + root));
            out.push_back(0.5 * (-m - root));
        }
    }
    CVec c = Eigen::Map<CVec>(out.data(), static_cast<Eigen::Index>(out.size()));
    sort_spectrum(c);
    return c;
}

Complex dde_characteristic(double v, double tau, Complex lambda) { return v - std::exp(-lambda * tau) - lambda; }

CVec delay_characteristic_roots(double a, double b, double tau, const std::vector<int>& branches)
{
    require(tau > 0.0, ErrorKind::contract, "tau must be positive");
    CVec out(static_cast<Eigen::Index>(branches.size()));
    if (b == 0.0) {
        out.setConstant(Complex(a, 0.0));
        return out;
    }
    // lambda = a + W_k(b tau e^{-a tau}) / tau
    const Complex z(b * tau * std::exp(-a * tau), 0.0);
    for (std::size_t i = 0; i < branches.size(); ++i) out[i] = a + lambert_w(z, branches[i]) / tau;
    sort_spectrum(out);
    return out;
}

CVec dde_roots_lambert(double v, double tau, const std::vector<int>& branches)
{
    require(tau > 0.0, ErrorKind::contract, "tau must be positive");
    const Complex z(-tau * std::exp(-tau * v), 0.0);
    CVec out(static_cast<Eigen::Index>(branches.size()));
    for (std::size_t i = 0; i < branches.size(); ++i) out[i] = v + lambert_w(z, branches[i]) / tau;
    return out;
}

std::vector<double> dde_hopf_locus(double tau)
{
    require(tau > 0.0, ErrorKind::contract, "tau must be positive");
    auto g = [tau](double v) { return v - std::cos(tau * std::sqrt(std::max(0.0, 1.0 - v * v))); };
    std::vector<double> roots;
    const int steps = 2000;  // 1e-3 mesh on (-1, 1)
    double x0 = -1.0 + 1e-3 * 0.5, g0 = g(x0);
    for (int i = 1; i < steps; ++i) {
        const double x1 = -1.0 + 1e-3 * (i + 0.5), g1 = g(x1);
        if (g0 == 0.0) {
            roots.push_back(x0);
        } else if ((g0 < 0.0) != (g1 < 0.0)) {
            double lo = x0, hi = x1, glo = g0;
            while (hi - lo > 1e-10) {
                const double m = 0.5 * (lo + hi), gm = g(m);
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = m;
                    glo = gm;
                } else {
                    hi = m;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        x0 = x1;
        g0 = g1;
    }
    return roots;
}

Vec homogeneous_values(const SlowFastSystem& sys, const Vec& u)
{
    const int q = sys.components();
    const int n = sys.n_fast() / q;
    Vec out(q);
    for (int c = 0; c < q; ++c) out[c] = u.segment(c * n, n).mean();
    return out;
}

Mat mode_matrix(const HomogeneousStructure& hs, const Vec& u_hom, const Vec& v, const Vec& mu, int n)
{
    Mat j = hs.local_jacobian(u_hom, v, mu);
    const double symbol = hs.grid.laplacian_symbol(n);
    j.diagonal() += symbol * hs.diffusion;
    if (hs.nonlocal_jacobian) {
        require(hs.kernel_coeffs.has_value() && n < hs.kernel_coeffs->size(), ErrorKind::contract,
                "kernel coefficient missing for mode " + std::to_string(n));
        j += (*hs.kernel_coeffs)[n] * hs.nonlocal_jacobian(u_hom, v, mu);
    }
    return j;
}

CVec homogeneous_spectrum(const SlowFastSystem& sys, const Vec& u, const Vec& v, const Vec& mu)
{
    require(sys.homogeneous().has_value(), ErrorKind::unsupported,
            "model " + sys.name() + " has no homogeneous modal structure");
    const auto& hs = *sys.homogeneous();
    const Vec uh = homogeneous_values(sys, u);
    const int npts = hs.grid.size();
    const int q = hs.components;
    CVec out(sys.n_fast());
    Eigen::Index k = 0;
    for (int n = 0; n < hs.grid.mode_count(); ++n) {
        const Mat m = mode_matrix(hs, uh, v, mu, n);
        CVec e;
        if (q == 1) {
            e = CVec::Constant(1, Complex(m(0, 0), 0.0));
        } else if (q == 2) {
            const double tr = m.trace(), det = m.determinant();
            const Complex root = std::sqrt(Complex(tr * tr - 4.0 * det, 0.0));
            e.resize(2);
            e << 0.5 * (tr + root), 0.5 * (tr - root);
        } else {
            e = dense_eigenvalues(m);
        }
        const bool twice = hs.grid.kind() == BoundaryKind::periodic && n > 0 && 2 * n < npts;
        for (int rep = 0; rep < (twice ? 2 : 1); ++rep) {
            out.segment(k, q) = e;
            k += q;
        }
    }
    require(k == out.size(), ErrorKind::contract, "mode count does not match the state dimension");
    sort_spectrum(out);
    return out;
}

namespace {

double leading_real_part(const Mat& m)
{
    if (m.rows() == 1) return m(0, 0);
    if (m.rows() == 2) {
        const double tr = m.trace(), det = m.determinant();
        const double disc = tr * tr - 4.0 * det;
        return disc >= 0.0 ? 0.5 * (tr + std::sqrt(disc)) : 0.5 * tr;
    }
    return dense_eigenvalues(m)[0].real();
}

}  // namespace

DispersionCurve dispersion_relation(const SlowFastSystem& sys, const Vec& u_eq, const Vec& v,
                                    const ParameterPoint& params, int n_max)
{
    require(sys.homogeneous().has_value(), ErrorKind::unsupported,
            "model " + sys.name() + " has no homogeneous modal structure");
    const auto& hs = *sys.homogeneous();
    ParameterPoint layer = params;
    layer.eps = 0.0;
    const double res = sys.fast(u_eq, v, layer).lpNorm<Eigen::Infinity>();
    if (!(res <= 1e-10)) fail(ErrorKind::precondition, "equilibrium residual " + std::to_string(res) + " > 1e-10");
    const Vec uh = homogeneous_values(sys, u_eq);
    const int nm = std::min(n_max, hs.grid.mode_count() - 1);
    DispersionCurve d;
    for (int n = 0; n <= nm; ++n) {
        d.modes.push_back(n);
        d.re_lambda.push_back(leading_real_part(mode_matrix(hs, uh, v, params.mu, n)));
    }
    return d;
}

int DispersionCurve::first_unstable_mode() const
{
    int best = -1;
    double best_val = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i] >= 1 && re_lambda[i] > best_val) {
            best = modes[i];
            best_val = re_lambda[i];
        }
    }
    return best;
}

double DispersionCurve::max_nonzero_mode(int* mode) const
{
    double best = -std::numeric_limits<double>::infinity();
    int arg = -1;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i] >= 1 && re_lambda[i] > best) {
            best = re_lambda[i];
            arg = modes[i];
        }
    }
    if (mode) *mode = arg;
    return best;
}

nlohmann::json to_json(const SpectrumReport& report)
{
    nlohmann::json j;
    auto eigs = nlohmann::json::array();
    for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i)
        eigs.push_back({report.eigenvalues[i].real(), report.eigenvalues[i].imag()});
    j["eigenvalues"] = eigs;
    j["sigma_u"] = report.sigma_u;
    j["sigma_c"] = report.sigma_c;
    j["sigma_s"] = report.sigma_s;
    j["gamma"] = report.gamma;
    j["midpoint_gap"] = report.midpoint_gap;
    j["centre_tol"] = report.centre_tol;
    j["normally_hyperbolic"] = report.normally_hyperbolic();
    return j;
}

}  // namespace slowfast
