#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hpo/errors.hpp"

namespace hpo {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

enum class Boundary { periodic, open };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Regular rectangular grid of rank 1..4. Flat indices are row-major: the
/// last axis varies fastest, so the first axis (time) labels contiguous slices.
class Grid {
 public:
  Grid(std::vector<Index> extents, std::vector<double> spacings,
       Boundary boundary = Boundary::periodic);

  Index rank() const { return static_cast<Index>(extents_.size()); }
  Index size() const { return size_; }
  Index extent(Index axis) const { return extents_[axis]; }
  double spacing(Index axis) const { return spacings_[axis]; }
  const std::vector<Index>& extents() const { return extents_; }
  const std::vector<double>& spacings() const { return spacings_; }
  Boundary boundary() const { return boundary_; }

  /// Product of spacings; the lattice delta is 1/cell_volume().
  double cell_volume() const { return cell_volume_; }

  std::vector<Index> unflatten(Index flat) const;
  Index flatten(std::span<const Index> multi) const;
  Index coordinate(Index flat, Index axis) const;

  /// Angular frequency of Fourier index k on an axis, with k wrapped into
  /// (-N/2, N/2]. The Nyquist index maps to +pi/spacing.
  double angular_frequency(Index axis, Index k) const;
  bool is_nyquist(Index axis, Index k) const;

  bool operator==(const Grid& other) const;

 private:
  std::vector<Index> extents_;
  std::vector<double> spacings_;
  Boundary boundary_;
  Index size_ = 0;
  double cell_volume_ = 1.0;
};

class TimeLattice {
 public:
  TimeLattice(Index n_points, double dt, Boundary boundary = Boundary::periodic);

  Index n_points() const { return grid_.size(); }
  double dt() const { return grid_.spacing(0); }
  Boundary boundary() const { return grid_.boundary(); }
  double span() const { return static_cast<double>(n_points()) * dt(); }
  double time(Index i) const { return static_cast<double>(i) * dt(); }
  const Grid& grid() const { return grid_; }

  bool operator==(const TimeLattice& other) const { return grid_ == other.grid_; }

 private:
  Grid grid_;
};

/// 4D grid (t, x, y, z) with a unit timelike foliation vector, signature
/// (+,-,-,-). The first grid axis carries t = n.X.
class SpacetimeLattice {
 public:
  SpacetimeLattice(std::array<Index, 4> extents, std::array<double, 4> spacings,
                   Eigen::Vector4d foliation = Eigen::Vector4d(1, 0, 0, 0));

  const Grid& grid() const { return grid_; }
  const Eigen::Vector4d& foliation() const { return foliation_; }
  bool has_default_foliation() const;
  TimeLattice time_axis() const;
  Index slice_size() const { return grid_.size() / grid_.extent(0); }

  static double minkowski(const Eigen::Vector4d& a, const Eigen::Vector4d& b);

 private:
  Grid grid_;
  Eigen::Vector4d foliation_;
};

/// Complex-valued function sampled on a grid. Immutable after construction.
class TestFunction {
 public:
  TestFunction(Grid grid, VectorXc values);
  TestFunction(const TimeLattice& lattice, VectorXc values);

  static TestFunction zero(const Grid& grid);
  static TestFunction constant(const Grid& grid, Complex value);
  /// Samples fn(t) at t_i = i*dt.
  static TestFunction sample(const TimeLattice& lattice,
                             const std::function<Complex(double)>& fn);
  /// Samples fn(coordinates) at every grid point; coordinates are index*spacing.
  static TestFunction sample(const Grid& grid,
                             const std::function<Complex(std::span<const double>)>& fn);

  const Grid& grid() const { return grid_; }
  const VectorXc& values() const { return values_; }
  Index size() const { return values_.size(); }
  Complex operator[](Index i) const { return values_[i]; }

  bool is_real(double tol = 1e-14) const;

  TestFunction operator+(const TestFunction& other) const;
  TestFunction operator-(const TestFunction& other) const;
  TestFunction operator*(Complex s) const;
  /// Pointwise product.
  TestFunction pointwise(const TestFunction& other) const;
  TestFunction conjugate() const;

 private:
  Grid grid_;
  VectorXc values_;
};

/// Discrete L2 pairing sum conj(f_i) g_i * cell_volume.
Complex inner_product(const TestFunction& f, const TestFunction& g);

/// Multidimensional DFT over the grid (unnormalized forward, 1/N inverse).
VectorXc dft(const Grid& grid, const VectorXc& values, bool inverse = false);

/// Operator diagonal in the discrete Fourier basis of a periodic grid.
class SpectralOperator {
 public:
  using Symbol = std::function<Complex(std::span<const double> angular_frequencies,
                                       std::span<const Index> fourier_index)>;

  SpectralOperator(Grid grid, VectorXc eigenvalues, std::string label,
                   bool self_adjoint, bool positive);

  /// Evaluates the symbol on every Fourier mode; flags are verified.
  static SpectralOperator from_symbol(const Grid& grid, const Symbol& symbol,
                                      std::string label, bool self_adjoint,
                                      bool positive);

  static SpectralOperator identity(const Grid& grid);
  /// d/dx along an axis, i*kappa with the Nyquist mode set to zero so the
  /// operator stays real and antisymmetric.
  static SpectralOperator derivative(const Grid& grid, Index axis = 0);
  /// -d^2/dx^2 along an axis: kappa^2 on every mode, Nyquist included.
  static SpectralOperator minus_second_derivative(const Grid& grid, Index axis = 0);
  /// sqrt(omega^2 - lambda D^2) on a time lattice.
  static SpectralOperator velocity_frequency(const TimeLattice& lattice, double omega,
                                             double lambda);

  const Grid& grid() const { return grid_; }
  const VectorXc& eigenvalues() const { return eigenvalues_; }
  const std::string& label() const { return label_; }
  bool self_adjoint() const { return self_adjoint_; }
  bool positive() const { return positive_; }
  bool invertible(double tol = 1e-14) const;

  SpectralOperator operator*(const SpectralOperator& other) const;
  SpectralOperator operator+(const SpectralOperator& other) const;
  SpectralOperator scaled(Complex s) const;
  /// Principal square root; requires every eigenvalue real and >= 0.
  SpectralOperator sqrt() const;
  SpectralOperator inverse() const;
  /// Real power of a positive operator (inverse powers need invertibility).
  SpectralOperator pow(double exponent) const;
  /// Generic functional calculus; flags must be supplied by the caller.
  SpectralOperator map(const std::function<Complex(Complex)>& fn, std::string label,
                       bool self_adjoint, bool positive) const;

  /// Dense matrix in the grid basis.
  MatrixXc to_matrix() const;

 private:
  Grid grid_;
  VectorXc eigenvalues_;
  std::string label_;
  bool self_adjoint_;
  bool positive_;
};

/// Spectral derivative of f on a time (or 1D) lattice.
TestFunction derivative(const TestFunction& f);

TestFunction spectral_apply(const SpectralOperator& op, const TestFunction& f);

/// Kernel of op^{-1} with the lattice delta normalization:
/// greens_kernel(identity) = delta_ij / cell_volume.
MatrixXc greens_kernel(const SpectralOperator& op);

/// K_n = (eta^{mu nu} - n^mu n^nu) d_mu d_nu + m^2 for the default foliation,
/// i.e. minus the spatial Laplacian plus m^2.
SpectralOperator build_Kn(const SpacetimeLattice& lattice, double mass);

}  // namespace hpo
