#include <cmath>

#include "builders.hpp"
#include "slowfast/spectra.hpp"

namespace slowfast {

Vec NeuralFieldData::firing(const Vec& u, double v1) const
{
    return (1.0 / (1.0 + (-gain * (u.array() - v1)).exp())).matrix();
}

Vec NeuralFieldData::firing_slope(const Vec& u, double v1) const
{
    const Eigen::ArrayXd t = firing(u, v1).array();
    return (gain * t * (1.0 - t)).matrix();
}

double NeuralFieldData::activity(const Vec& u, double v1) const { return grid.integrate(firing(u, v1)); }

NeuralFieldData neural_field_data(const ModelPreset& p)
{
    using detail::param;
    require(p.name == ModelKind::neural_field && p.grid.has_value(), ErrorKind::contract,
            "neural_field_data needs a neural_field preset with a grid");
    NeuralFieldData nf;
    nf.grid = *p.grid;
    nf.gain = param(p, "theta_gain");
    const double k1 = param(p, "kappa1"), k2 = param(p, "kappa2"), k3 = param(p, "kappa3"), k4 = param(p, "kappa4");
    require(k4 != 0.0, ErrorKind::config, "kappa4 must be non-zero");
    const int n = nf.grid.size();
    const double period = 2.0 * nf.grid.half_length();
    const Vec& x = nf.grid.nodes();
    nf.weights.resize(n, n);
    nf.modulation.resize(n);
    for (int j = 0; j < n; ++j) {
        const double mod = k2 + k3 * std::cos(x[j] / k4);
        nf.modulation[j] = mod;
        for (int i = 0; i < n; ++i) {
            double dist = std::abs(x[i] - x[j]);
            dist = std::min(dist, period - dist);
            nf.weights(i, j) = k1 * std::exp(-dist) * mod * nf.grid.spacing();
        }
    }
    return nf;
}

Vec nf_bump_seed(const ModelPreset& p, double half_width)
{
    using detail::param;
    require(p.grid.has_value() && half_width > 0.0, ErrorKind::contract, "bump seed needs a grid and a positive width");
    // Exact bump of the unmodulated kernel with a Heaviside rate, centred at 0.
    const double amp = param(p, "kappa1") * param(p, "kappa2");
    const Vec& x = p.grid->nodes();
    Vec u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = std::abs(x[i]);
        u[i] = r < half_width ? amp * (2.0 - std::exp(r - half_width) - std::exp(-r - half_width))
                              : amp * (std::exp(half_width - r) - std::exp(-half_width - r));
    }
    return u;
}

double nf_bump_threshold(const ModelPreset& p, double half_width)
{
    using detail::param;
    return param(p, "kappa1") * param(p, "kappa2") * (1.0 - std::exp(-2.0 * half_width));
}

std::vector<double> nf_levelset(const Grid& grid, const Vec& u, double v1)
{
    require(u.size() == grid.size(), ErrorKind::contract, "level set field does not match grid");
    std::vector<double> xs;
    const Vec& x = grid.nodes();
    for (int j = 0; j + 1 < grid.size(); ++j) {
        const double f0 = u[j] - v1, f1 = u[j + 1] - v1;
        if (f0 == 0.0) {
            xs.push_back(x[j]);
        } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
            xs.push_back(x[j] + grid.spacing() * f0 / (f0 - f1));
        }
    }
    if (grid.size() > 0 && u[grid.size() - 1] - v1 == 0.0) xs.push_back(x[grid.size() - 1]);
    return xs;
}

namespace detail {

SlowFastSystem build_neural_field(const ModelPreset& p)
{
    const NeuralFieldData nf = neural_field_data(p);
    const int n = nf.grid.size();

    SystemDefinition def;
    def.name = "neural_field";
    def.n_fast = n;
    def.m_slow = 2;
    def.p_params = 3;
    def.grid = nf.grid;
    def.components = 1;

    def.rhs_fast = [nf](const Vec& u, const Vec& v, const Vec&, double) {
        return (nf.weights * nf.firing(u, v[0]) - u).eval();
    };
    def.rhs_slow = [nf](const Vec& u, const Vec& v, const Vec& mu, double) {
        const double q = nf.activity(u, v[0]);
        return (Vec(2) << v[1] + mu[2] * q, -v[0] + mu[0] + mu[1] * q).finished();
    };
    def.jac_u = [nf, n](const Vec& u, const Vec& v, const Vec&, double) {
        Mat j = nf.weights * nf.firing_slope(u, v[0]).asDiagonal();
        j.diagonal().array() -= 1.0;
        return j;
    };
    def.jac_v = [nf, n](const Vec& u, const Vec& v, const Vec&, double) {
        Mat j = Mat::Zero(n, 2);
        j.col(0) = -(nf.weights * nf.firing_slope(u, v[0]));
        return j;
    };

    // W diag(theta') is similar to a symmetric matrix when the modulation is
    // positive; nodes with negligible slope only contribute -1.
    if ((nf.modulation.array() > 0.0).all()) {
        const Mat sym_kernel = nf.weights * nf.modulation.cwiseInverse().asDiagonal();
        def.spectrum_hook = [nf, n, sym_kernel](const Vec& u, const Vec& v, const Vec&) {
            const Vec e = nf.firing_slope(u, v[0]).cwiseProduct(nf.modulation);
            std::vector<int> active;
            for (int i = 0; i < n; ++i)
                if (e[i] > 1e-14) active.push_back(i);
            CVec out = CVec::Constant(n, Complex(-1.0, 0.0));
            if (active.empty()) return out;
            const int k = static_cast<int>(active.size());
            Mat s(k, k);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) {
                    const int i = active[a], j = active[b];
                    s(a, b) = 0.5 * (sym_kernel(i, j) + sym_kernel(j, i)) * std::sqrt(e[i] * e[j]);
                }
            const Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
            require(es.info() == Eigen::Success, ErrorKind::numerical, "symmetric eigensolver failed");
            for (int a = 0; a < k; ++a) out[a] = Complex(es.eigenvalues()[a] - 1.0, 0.0);
            sort_spectrum(out);
            return out;
        };
    }

    // Reference: low-activity state at v1 = 0.5, v2 = 0.
    ReferenceEquilibrium ref;
    ref.params = preset_parameters(p);
    ref.params.eps = 0.0;
    ref.v = (Vec(2) << 0.5, 0.0).finished();
    Vec u = Vec::Zero(n);
    for (int it = 0; it < 200; ++it) {
        Vec next = nf.weights * nf.firing(u, ref.v[0]);
        const double change = (next - u).lpNorm<Eigen::Infinity>();
        u = std::move(next);
        if (change < 1e-15) break;
    }
    ref.u = u;
    def.linear_part = def.jac_u(ref.u, ref.v, ref.params.mu, 0.0);
    def.reference = ref;
    return SlowFastSystem(std::move(def));
}

}  // namespace detail
}  // namespace slowfast
