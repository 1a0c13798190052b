#include "slowfast/discretize.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "slowfast/error.hpp"

namespace slowfast {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using cvec = std::vector<std::complex<double>>;
constexpr double pi = std::numbers::pi;

const char* to_string(BoundaryKind kind) { return kind == BoundaryKind::periodic ? "periodic" : "neumann"; }

Grid::Grid(BoundaryKind kind, double l, int n) : kind_(kind), l_(l), n_(n)
{
    require(std::isfinite(l) && l > 0.0, ErrorKind::contract, "grid length must be positive");
    require(n >= 8 && n % 2 == 0, ErrorKind::contract, "n_points must be an even integer >= 8");
    x_.resize(n);
    if (kind == BoundaryKind::periodic) {
        dx_ = 2.0 * l / n;
        for (int j = 0; j < n; ++j) x_[j] = -l + dx_ * j;
    } else {
        dx_ = l / n;
        for (int j = 0; j < n; ++j) x_[j] = (j + 0.5) * dx_;
    }
}

Grid Grid::periodic(double half_length, int n_points) { return Grid(BoundaryKind::periodic, half_length, n_points); }
Grid Grid::neumann(double length, int n_points) { return Grid(BoundaryKind::neumann, length, n_points); }

double Grid::wavenumber(int n) const { return n * pi / l_; }

double Grid::laplacian_symbol(int n) const
{
    const double k = wavenumber(n);
    if (kind_ == BoundaryKind::periodic) return -k * k;
    const double s = std::sin(0.5 * k * dx_);
    return -4.0 * s * s / (dx_ * dx_);
}

int Grid::mode_count() const { return kind_ == BoundaryKind::periodic ? n_ / 2 + 1 : n_; }

double Grid::integrate(const VectorXd& f) const { return dx_ * f.sum(); }

bool operator==(const Grid& a, const Grid& b)
{
    return a.kind() == b.kind() && a.size() == b.size() && a.half_length() == b.half_length();
}

namespace {

void require_size(const Grid& grid, const VectorXd& u)
{
    require(u.size() == grid.size(), ErrorKind::contract,
            "field length " + std::to_string(u.size()) + " does not match grid size " + std::to_string(grid.size()));
}

// Signed integer frequency of FFT bin m.
int signed_bin(int m, int n) { return m <= n / 2 ? m : m - n; }

VectorXd periodic_d2(const Grid& grid, const VectorXd& u)
{
    const int n = grid.size();
    Eigen::FFT<double> fft;
    std::vector<double> in(u.data(), u.data() + n);
    cvec spec;
    fft.fwd(spec, in);
    for (int m = 0; m < n; ++m) {
        const double k = grid.wavenumber(signed_bin(m, n));
        spec[m] *= -k * k;
    }
    std::vector<double> out;
    fft.inv(out, spec);
    return Eigen::Map<VectorXd>(out.data(), n);
}

VectorXd neumann_d2(const Grid& grid, const VectorXd& u)
{
    const int n = grid.size();
    const double c = 1.0 / (grid.spacing() * grid.spacing());
    VectorXd out(n);
    for (int j = 0; j < n; ++j) {
        const double left = u[j == 0 ? 0 : j - 1];
        const double right = u[j == n - 1 ? n - 1 : j + 1];
        out[j] = c * ((left - u[j]) + (right - u[j]));
    }
    return out;
}

}  // namespace

VectorXd second_derivative(const Grid& grid, const VectorXd& u)
{
    require_size(grid, u);
    return grid.kind() == BoundaryKind::periodic ? periodic_d2(grid, u) : neumann_d2(grid, u);
}

MatrixXd second_derivative_matrix(const Grid& grid)
{
    const int n = grid.size();
    MatrixXd d = MatrixXd::Zero(n, n);
    if (grid.kind() == BoundaryKind::neumann) {
        const double c = 1.0 / (grid.spacing() * grid.spacing());
        for (int j = 0; j < n; ++j) {
            if (j > 0) {
                d(j, j - 1) += c;
                d(j, j) -= c;
            }
            if (j < n - 1) {
                d(j, j + 1) += c;
                d(j, j) -= c;
            }
        }
        return d;
    }
    // Circulant: first column is D2 applied to the unit vector e_0.
    VectorXd e0 = VectorXd::Zero(n);
    e0[0] = 1.0;
    const VectorXd c0 = periodic_d2(grid, e0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) d(i, j) = c0[(i - j + n) % n];
    return d;
}

VectorXd circular_convolution(const Grid& grid, const VectorXd& kernel_samples, const VectorXd& u)
{
    if (grid.kind() != BoundaryKind::periodic) fail(ErrorKind::unsupported, "circular convolution needs a periodic grid");
    require_size(grid, u);
    require_size(grid, kernel_samples);
    const int n = grid.size();
    Eigen::FFT<double> fft;
    std::vector<double> wv(kernel_samples.data(), kernel_samples.data() + n);
    std::vector<double> uv(u.data(), u.data() + n);
    cvec ws, us;
    fft.fwd(ws, wv);
    fft.fwd(us, uv);
    for (int m = 0; m < n; ++m) us[m] *= ws[m];
    std::vector<double> out;
    fft.inv(out, us);
    return Eigen::Map<VectorXd>(out.data(), n) * grid.spacing();
}

MatrixXd convolution_matrix(const Grid& grid, const VectorXd& kernel_samples)
{
    if (grid.kind() != BoundaryKind::periodic) fail(ErrorKind::unsupported, "circular convolution needs a periodic grid");
    require_size(grid, kernel_samples);
    const int n = grid.size();
    MatrixXd c(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) c(i, j) = grid.spacing() * kernel_samples[(i - j + n) % n];
    return c;
}

double kernel_offset(const Grid& grid, int j)
{
    const int n = grid.size();
    return grid.spacing() * signed_bin(j, n);
}

VectorXd sample_kernel(const Grid& grid, const std::function<double(double)>& w)
{
    VectorXd s(grid.size());
    for (int j = 0; j < grid.size(); ++j) s[j] = w(kernel_offset(grid, j));
    return s;
}

VectorXd box_kernel_samples(const Grid& grid, double h)
{
    require(h > 0.0 && h <= grid.half_length(), ErrorKind::contract, "box half-width must lie in (0, l]");
    const double dx = grid.spacing();
    VectorXd s(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const double x = std::abs(kernel_offset(grid, j));
        const double lo = x - 0.5 * dx, hi = x + 0.5 * dx;
        const double covered = std::clamp(std::min(hi, h) - std::max(lo, -h), 0.0, dx);
        s[j] = covered / dx / (2.0 * h);
    }
    return s / (dx * s.sum());
}

KernelSpectrum kernel_fourier_coeffs(const Grid& grid, const VectorXd& kernel_samples)
{
    if (grid.kind() != BoundaryKind::periodic) fail(ErrorKind::unsupported, "kernel coefficients need a periodic grid");
    require_size(grid, kernel_samples);
    const int n = grid.size();
    const double scale = std::max(1.0, kernel_samples.cwiseAbs().maxCoeff());
    for (int j = 1; j < n; ++j) {
        if (std::abs(kernel_samples[j] - kernel_samples[n - j]) > 1e-10 * scale)
            fail(ErrorKind::contract, "kernel samples are not even (offset index " + std::to_string(j) + ")");
    }
    const int modes = n / 2 + 1;
    VectorXd w(modes);
    for (int m = 0; m < modes; ++m) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += kernel_samples[j] * std::cos(2.0 * pi * double(m) * j / n);
        w[m] = acc * grid.spacing();
    }
    if (!(w[0] > 0.0)) fail(ErrorKind::domain, "kernel mass w_0 must be positive for normalization");
    KernelSpectrum out;
    out.mass = w[0];
    out.coefficients = w / w[0];
    out.coefficients[0] = 1.0;
    return out;
}

VectorXd periodic_shift(const VectorXd& u, int components, int shift)
{
    const int n = static_cast<int>(u.size()) / components;
    VectorXd out(u.size());
    for (int c = 0; c < components; ++c)
        for (int j = 0; j < n; ++j) out[c * n + ((j + shift) % n + n) % n] = u[c * n + j];
    return out;
}

VectorXd periodic_reflect(const VectorXd& u, int components)
{
    const int n = static_cast<int>(u.size()) / components;
    VectorXd out(u.size());
    for (int c = 0; c < components; ++c)
        for (int j = 0; j < n; ++j) out[c * n + (n - j) % n] = u[c * n + j];
    return out;
}

VectorXd fourier_amplitudes(const VectorXd& u)
{
    const int n = static_cast<int>(u.size());
    Eigen::FFT<double> fft;
    std::vector<double> in(u.data(), u.data() + n);
    cvec spec;
    fft.fwd(spec, in);
    VectorXd a(n / 2 + 1);
    for (int m = 0; m <= n / 2; ++m) a[m] = std::abs(spec[m]) * ((m == 0 || m == n / 2) ? 1.0 : 2.0) / n;
    return a;
}

}  // namespace slowfast
