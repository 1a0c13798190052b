#pragma once

#include <Eigen/Dense>

#include <functional>

namespace slowfast {

enum class BoundaryKind { periodic, neumann };

const char* to_string(BoundaryKind kind);

// Periodic grids cover (-l, l) without the right endpoint; Neumann grids
// cover [0, l] with nodes at cell centres x_j = (j + 1/2) l / n.
class Grid {
public:
    Grid() = default;
    static Grid periodic(double half_length, int n_points);
    static Grid neumann(double length, int n_points);

    BoundaryKind kind() const { return kind_; }
    double half_length() const { return l_; }
    int size() const { return n_; }
    double spacing() const { return dx_; }
    const Eigen::VectorXd& nodes() const { return x_; }

    // Wavenumber of mode n (n pi / l).
    double wavenumber(int n) const;
    // Symbol of the discrete Laplacian on mode n (exact -k^2 for periodic,
    // the three-point symbol for Neumann).
    double laplacian_symbol(int n) const;
    // Number of distinct cosine modes: n/2 + 1 periodic, n Neumann.
    int mode_count() const;
    // Trapezoid weights (uniform dx).
    double integrate(const Eigen::VectorXd& f) const;

private:
    Grid(BoundaryKind kind, double l, int n);
    BoundaryKind kind_ = BoundaryKind::periodic;
    double l_ = 1.0;
    int n_ = 0;
    double dx_ = 0.0;
    Eigen::VectorXd x_;
};

bool operator==(const Grid& a, const Grid& b);

struct KernelSpectrum {
    Eigen::VectorXd coefficients;  // w_n, n = 0..n_points/2, w_0 = 1
    double mass = 1.0;             // unnormalized w_0
};

Eigen::VectorXd second_derivative(const Grid& grid, const Eigen::VectorXd& u);
Eigen::MatrixXd second_derivative_matrix(const Grid& grid);

// Circular trapezoid convolution (w * u)_i = dx * sum_j w[(i - j) mod n] u_j.
// Kernel samples are indexed by circular offset: w[j] = w(j dx) for j <= n/2,
// w(j dx - 2l) beyond.
Eigen::VectorXd circular_convolution(const Grid& grid, const Eigen::VectorXd& kernel_samples,
                                     const Eigen::VectorXd& u);
Eigen::MatrixXd convolution_matrix(const Grid& grid, const Eigen::VectorXd& kernel_samples);

KernelSpectrum kernel_fourier_coeffs(const Grid& grid, const Eigen::VectorXd& kernel_samples);

// Signed circular offset of sample j.
double kernel_offset(const Grid& grid, int j);
Eigen::VectorXd sample_kernel(const Grid& grid, const std::function<double(double)>& w);
// (2h)^-1 on (-h, h), each sample weighted by the fraction of its cell inside
// the support, then rescaled to unit discrete mass.
Eigen::VectorXd box_kernel_samples(const Grid& grid, double h);

// Node permutations acting on each of `components` stacked fields.
Eigen::VectorXd periodic_shift(const Eigen::VectorXd& u, int components, int shift);
Eigen::VectorXd periodic_reflect(const Eigen::VectorXd& u, int components);

// Real cosine/sine amplitudes |u_hat_n| for n = 0..n/2 on a periodic grid.
Eigen::VectorXd fourier_amplitudes(const Eigen::VectorXd& u);

}  // namespace slowfast
