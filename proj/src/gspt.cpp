#include "slowfast/gspt.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace slowfast {

const char* to_string(FoldClass c)
{
    switch (c) {
    case FoldClass::normally_hyperbolic: return "normally_hyperbolic";
    case FoldClass::regular_jump: return "regular_jump";
    case FoldClass::folded_singularity: return "folded_singularity";
    }
    return "?";
}

const char* to_string(FoldedLabel l)
{
    switch (l) {
    case FoldedLabel::folded_saddle: return "folded_saddle";
    case FoldedLabel::folded_node: return "folded_node";
    case FoldedLabel::folded_focus: return "folded_focus";
    case FoldedLabel::folded_saddle_node: return "folded_saddle_node";
    case FoldedLabel::degenerate: return "degenerate";
    }
    return "?";
}

namespace {

ParameterPoint layer_of(const ParameterPoint& p)
{
    ParameterPoint l = p;
    l.eps = 0.0;
    return l;
}

double sign_of_orthogonal(const Mat& q) { return q.determinant() >= 0.0 ? 1.0 : -1.0; }

// Singular degeneracy test shared by the reduced and fold classifiers.
bool is_singular(const Adjugate& a, int n, double tol_det)
{
    if (n <= 3) return std::abs(a.det) <= tol_det;
    return a.sigma_min <= tol_det * std::max(1.0, a.sigma_max);
}

// Numerical rank threshold on singular values.
double rank_tol(const Vec& s) { return static_cast<double>(s.size()) * std::numeric_limits<double>::epsilon() * s[0]; }

}  // namespace

Adjugate adjugate(const Mat& a)
{
    require(a.rows() == a.cols() && a.rows() > 0, ErrorKind::contract, "adjugate needs a non-empty square matrix");
    const Eigen::Index n = a.rows();
    Adjugate out;
    out.adj.resize(n, n);
    if (n <= 3) {
        if (n == 1) {
            out.adj(0, 0) = 1.0;
            out.det = a(0, 0);
        } else if (n == 2) {
            out.adj << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
            out.det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        } else {
            auto cof = [&](int r, int c) {
                const int r0 = (r + 1) % 3, r1 = (r + 2) % 3, c0 = (c + 1) % 3, c1 = (c + 2) % 3;
                return a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
            };
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) out.adj(c, r) = cof(r, c);
            out.det = a(0, 0) * out.adj(0, 0) + a(0, 1) * out.adj(1, 0) + a(0, 2) * out.adj(2, 0);
        }
        const Eigen::JacobiSVD<Mat> svd(a);
        out.sigma_min = svd.singularValues()[n - 1];
        out.sigma_max = svd.singularValues()[0];
        if (n >= 2 && svd.singularValues()[n - 2] <= rank_tol(svd.singularValues()))
            fail(ErrorKind::unsupported, "rank deficiency >= 2: adjugate vanishes (degenerate)");
        return out;
    }
    // A = U S V^T, adj(A) = det(U) det(V) V adj(S) U^T, adj(S)_kk = prod_{i != k} s_i.
    const Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    const double sgn = sign_of_orthogonal(svd.matrixU()) * sign_of_orthogonal(svd.matrixV());
    out.sigma_min = s[n - 1];
    out.sigma_max = s[0];
    double log_sum = 0.0;
    int zeros = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (s[i] > 0.0) log_sum += std::log(s[i]);
        else ++zeros;
    }
    if (s[n - 2] <= rank_tol(s)) fail(ErrorKind::unsupported, "rank deficiency >= 2: adjugate vanishes (degenerate)");
    Vec d(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (zeros == 0) d[k] = std::exp(log_sum - std::log(s[k]));
        else d[k] = s[k] == 0.0 ? std::exp(log_sum) : 0.0;
    }
    out.det = zeros ? 0.0 : sgn * std::exp(log_sum);
    out.adj = sgn * svd.matrixV() * d.asDiagonal() * svd.matrixU().transpose();
    if (!std::isfinite(out.det) || !out.adj.allFinite())
        fail(ErrorKind::overflow, "determinant/adjugate overflow for n=" + std::to_string(n));
    return out;
}

FlowValue reduced_rhs(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params,
                      double tol_det)
{
    const ParameterPoint layer = layer_of(params);
    const State st{0.0, u, v};
    const Mat ju = jacobian_u(sys, st, layer);
    const Mat jv = jacobian_v(sys, st, layer);
    const int n = sys.n_fast();
    bool singular;
    if (n <= 3) {
        singular = std::abs(ju.determinant()) <= tol_det;
    } else {
        const Eigen::BDCSVD<Mat> svd(ju);
        singular = svd.singularValues()[n - 1] <= tol_det * std::max(1.0, svd.singularValues()[0]);
    }
    if (singular) fail(ErrorKind::degenerate, "D_uF is singular here: use desingularized_rhs");
    FlowValue out;
    out.dv = sys.slow(u, v, layer);
    out.du = -Eigen::PartialPivLU<Mat>(ju).solve(jv * out.dv);
    return out;
}

FlowValue desingularized_rhs(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params)
{
    const ParameterPoint layer = layer_of(params);
    const State st{0.0, u, v};
    const Adjugate a = adjugate(jacobian_u(sys, st, layer));
    const Vec g = sys.slow(u, v, layer);
    FlowValue out;
    out.du = a.adj * (jacobian_v(sys, st, layer) * g);
    out.dv = -a.det * g;
    return out;
}

FoldPointReport classify_fold_point(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params,
                                    double tol_det, double tol_cond)
{
    const ParameterPoint layer = layer_of(params);
    const double res = sys.fast(u, v, layer).lpNorm<Eigen::Infinity>();
    if (!(res <= 1e-8)) fail(ErrorKind::precondition, "point is not on the critical manifold (|F| = " + std::to_string(res) + ")");
    const State st{0.0, u, v};
    const Adjugate a = adjugate(jacobian_u(sys, st, layer));
    const Vec g = sys.slow(u, v, layer);
    FoldPointReport r;
    r.u = u;
    r.v = v;
    r.det_DuF = a.det;
    r.sigma_min = a.sigma_min;
    r.condition_value = a.adj * (jacobian_v(sys, st, layer) * g);
    const int n = sys.n_fast();
    if (!is_singular(a, n, tol_det)) {
        r.classification = FoldClass::normally_hyperbolic;
        return r;
    }
    // For n > 3 the adjugate is measured relative to its own 2-norm.
    double cond = r.condition_value.norm();
    if (n > 3) {
        const double adj_norm = a.adj.norm();
        cond = adj_norm > 0.0 ? cond / adj_norm : 0.0;
    }
    r.classification = cond > tol_cond ? FoldClass::regular_jump : FoldClass::folded_singularity;
    return r;
}

FoldedSingularityClass classify_folded_singularity(double J11, double J12, double J21)
{
    FoldedSingularityClass c;
    c.J11 = J11;
    c.J12 = J12;
    c.J21 = J21;
    const double prod = J12 * J21;
    const double disc = J11 * J11 + 4.0 * prod;
    const Complex root = std::sqrt(Complex(disc, 0.0));
    c.eigenvalues = {0.5 * (J11 + root), 0.5 * (J11 - root)};
    if (std::abs(prod) <= 1e-12) {
        c.label = FoldedLabel::folded_saddle_node;
    } else if (std::abs(disc) <= 1e-12 * std::max(1.0, J11 * J11)) {
        c.label = FoldedLabel::degenerate;
    } else if (disc < 0.0) {
        c.label = FoldedLabel::folded_focus;
    } else {
        const double l1 = c.eigenvalues[0].real(), l2 = c.eigenvalues[1].real();
        c.label = (l1 > 0) != (l2 > 0) ? FoldedLabel::folded_saddle : FoldedLabel::folded_node;
    }
    std::optional<FoldedLabel> rule;
    if (std::abs(prod) <= 1e-12) rule = FoldedLabel::folded_saddle_node;
    else if (prod > 0) rule = FoldedLabel::folded_saddle;
    else if (J11 < 0 && disc > 0) rule = FoldedLabel::folded_node;
    c.sign_rule_agrees = !rule || *rule == c.label;
    return c;
}

Vec second_directional_derivative(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params,
                                  const Vec& z)
{
    const ParameterPoint layer = layer_of(params);
    const double h = 1e-4 * std::max(1.0, u.lpNorm<Eigen::Infinity>());
    const Vec f0 = sys.fast(u, v, layer);
    auto d2 = [&](double step) {
        return Vec((sys.fast(u + step * z, v, layer) - 2.0 * f0 + sys.fast(u - step * z, v, layer)) / (step * step));
    };
    return (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
}

FoldNormalForm fold_normalform_coeffs(const SlowFastSystem& sys, const Vec& u, const Vec& v, const ParameterPoint& params,
                                      double tol_det)
{
    const ParameterPoint layer = layer_of(params);
    const State st{0.0, u, v};
    const Mat ju = jacobian_u(sys, st, layer);
    const NearestEigen ne = nearest_eigenpair(ju, 0.0);
    const double scale = std::max(1.0, ju.lpNorm<Eigen::Infinity>());
    if (!(std::abs(ne.pair.value) <= 1e-6 * scale))
        fail(ErrorKind::precondition, "D_uF has no zero eigenvalue at this point (closest " +
                                          std::to_string(std::abs(ne.pair.value)) + ")");
    if (!(ne.separation >= 10.0 * tol_det))
        fail(ErrorKind::degenerate, "zero eigenvalue of D_uF is not simple");
    // Rotate the complex phase away and keep real parts.
    auto realify = [](const Eigen::VectorXcd& z) {
        Eigen::Index k;
        z.cwiseAbs().maxCoeff(&k);
        const Complex phase = z[k] / std::abs(z[k]);
        return Vec((z / phase).real());
    };
    FoldNormalForm nf;
    nf.zeta = realify(ne.pair.right).normalized();
    Vec left = realify(ne.pair.left);
    nf.zeta_star = left / left.dot(nf.zeta);
    nf.alpha = (nf.zeta_star.transpose() * jacobian_v(sys, st, layer)).transpose();
    nf.beta = nf.zeta_star.dot(second_directional_derivative(sys, u, v, params, nf.zeta));
    return nf;
}

nlohmann::json to_json(const FoldPointReport& r)
{
    nlohmann::json j;
    j["u"] = std::vector<double>(r.u.data(), r.u.data() + r.u.size());
    j["v"] = std::vector<double>(r.v.data(), r.v.data() + r.v.size());
    j["det_DuF"] = r.det_DuF;
    j["sigma_min"] = r.sigma_min;
    j["condition_value"] = std::vector<double>(r.condition_value.data(), r.condition_value.data() + r.condition_value.size());
    j["classification"] = to_string(r.classification);
    return j;
}

nlohmann::json to_json(const FoldedSingularityClass& c)
{
    nlohmann::json j;
    j["J11"] = c.J11;
    j["J12"] = c.J12;
    j["J21"] = c.J21;
    j["eigenvalues"] = {{c.eigenvalues[0].real(), c.eigenvalues[0].imag()},
                        {c.eigenvalues[1].real(), c.eigenvalues[1].imag()}};
    j["label"] = to_string(c.label);
    j["sign_rule_agrees"] = c.sign_rule_agrees;
    return j;
}

}  // namespace slowfast
