#include "hpo/lattice.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <sstream>

namespace hpo {

namespace {

constexpr double kFlagTolerance = 1e-12;

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw DimensionError(std::string(what) + ": grid mismatch");
}

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "open"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "open") return Boundary::open;
  throw PreconditionError("unknown boundary '" + s + "'");
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(std::vector<Index> extents, std::vector<double> spacings, Boundary boundary)
    : extents_(std::move(extents)), spacings_(std::move(spacings)), boundary_(boundary) {
  if (extents_.empty() || extents_.size() > 4)
    throw PreconditionError("grid rank must be between 1 and 4");
  if (extents_.size() != spacings_.size())
    throw DimensionError("grid: extents and spacings differ in length");
  size_ = 1;
  for (std::size_t a = 0; a < extents_.size(); ++a) {
    if (extents_[a] < 1) throw PreconditionError("grid extent must be positive");
    if (!(spacings_[a] > 0.0) || !std::isfinite(spacings_[a]))
      throw PreconditionError("grid spacing must be positive and finite");
    size_ *= extents_[a];
    cell_volume_ *= spacings_[a];
  }
}

std::vector<Index> Grid::unflatten(Index flat) const {
  std::vector<Index> multi(extents_.size());
  for (Index a = rank() - 1; a >= 0; --a) {
    multi[a] = flat % extents_[a];
    flat /= extents_[a];
  }
  return multi;
}

Index Grid::flatten(std::span<const Index> multi) const {
  if (static_cast<Index>(multi.size()) != rank()) throw DimensionError("grid: rank mismatch");
  Index flat = 0;
  for (Index a = 0; a < rank(); ++a) flat = flat * extents_[a] + multi[a];
  return flat;
}

Index Grid::coordinate(Index flat, Index axis) const {
  Index stride = 1;
  for (Index a = rank() - 1; a > axis; --a) stride *= extents_[a];
  return (flat / stride) % extents_[axis];
}

double Grid::angular_frequency(Index axis, Index k) const {
  const Index n = extents_[axis];
  const Index wrapped = (2 * k <= n) ? k : k - n;
  return 2.0 * std::numbers::pi * static_cast<double>(wrapped) /
         (static_cast<double>(n) * spacings_[axis]);
}

bool Grid::is_nyquist(Index axis, Index k) const {
  return extents_[axis] % 2 == 0 && 2 * k == extents_[axis];
}

bool Grid::operator==(const Grid& other) const {
  return extents_ == other.extents_ && spacings_ == other.spacings_ &&
         boundary_ == other.boundary_;
}

// ---------------------------------------------------------------------------
// Lattices

TimeLattice::TimeLattice(Index n_points, double dt, Boundary boundary)
    : grid_({n_points}, {dt}, boundary) {
  if (n_points < 2) throw PreconditionError("time lattice needs at least 2 points");
}

SpacetimeLattice::SpacetimeLattice(std::array<Index, 4> extents,
                                   std::array<double, 4> spacings,
                                   Eigen::Vector4d foliation)
    : grid_({extents.begin(), extents.end()}, {spacings.begin(), spacings.end()},
            Boundary::periodic),
      foliation_(foliation) {
  if (std::abs(minkowski(foliation_, foliation_) - 1.0) > 1e-12)
    throw PreconditionError("foliation vector must satisfy eta(n,n) = 1");
  if (foliation_[0] <= 0.0)
    throw PreconditionError("foliation vector must be future-pointing");
}

double SpacetimeLattice::minkowski(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

bool SpacetimeLattice::has_default_foliation() const {
  return foliation_ == Eigen::Vector4d(1, 0, 0, 0);
}

TimeLattice SpacetimeLattice::time_axis() const {
  return TimeLattice(grid_.extent(0), grid_.spacing(0), Boundary::periodic);
}

// ---------------------------------------------------------------------------
// TestFunction

TestFunction::TestFunction(Grid grid, VectorXc values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() == 0) throw PreconditionError("test function must not be empty");
  if (values_.size() != grid_.size())
    throw DimensionError("test function length does not match its grid");
}

TestFunction::TestFunction(const TimeLattice& lattice, VectorXc values)
    : TestFunction(lattice.grid(), std::move(values)) {}

TestFunction TestFunction::zero(const Grid& grid) {
  return TestFunction(grid, VectorXc::Zero(grid.size()));
}

TestFunction TestFunction::constant(const Grid& grid, Complex value) {
  return TestFunction(grid, VectorXc::Constant(grid.size(), value));
}

TestFunction TestFunction::sample(const TimeLattice& lattice,
                                  const std::function<Complex(double)>& fn) {
  VectorXc v(lattice.n_points());
  for (Index i = 0; i < v.size(); ++i) v[i] = fn(lattice.time(i));
  return TestFunction(lattice, std::move(v));
}

TestFunction TestFunction::sample(
    const Grid& grid, const std::function<Complex(std::span<const double>)>& fn) {
  VectorXc v(grid.size());
  std::vector<double> coords(grid.rank());
  for (Index i = 0; i < grid.size(); ++i) {
    const auto multi = grid.unflatten(i);
    for (Index a = 0; a < grid.rank(); ++a)
      coords[a] = static_cast<double>(multi[a]) * grid.spacing(a);
    v[i] = fn(coords);
  }
  return TestFunction(grid, std::move(v));
}

bool TestFunction::is_real(double tol) const {
  return values_.imag().cwiseAbs().maxCoeff() <= tol;
}

TestFunction TestFunction::operator+(const TestFunction& other) const {
  require_same_grid(grid_, other.grid_, "test function sum");
  return TestFunction(grid_, values_ + other.values_);
}

TestFunction TestFunction::operator-(const TestFunction& other) const {
  require_same_grid(grid_, other.grid_, "test function difference");
  return TestFunction(grid_, values_ - other.values_);
}

TestFunction TestFunction::operator*(Complex s) const { return TestFunction(grid_, values_ * s); }

TestFunction TestFunction::pointwise(const TestFunction& other) const {
  require_same_grid(grid_, other.grid_, "pointwise product");
  return TestFunction(grid_, values_.cwiseProduct(other.values_));
}

TestFunction TestFunction::conjugate() const { return TestFunction(grid_, values_.conjugate()); }

Complex inner_product(const TestFunction& f, const TestFunction& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  return f.values().dot(g.values()) * f.grid().cell_volume();
}

// ---------------------------------------------------------------------------
// DFT

VectorXc dft(const Grid& grid, const VectorXc& values, bool inverse) {
  if (values.size() != grid.size()) throw DimensionError("dft: length mismatch");
  Eigen::FFT<double> fft;
  VectorXc data = values;
  std::vector<Complex> line_in;
  std::vector<Complex> line_out;
  Index stride = grid.size();
  for (Index axis = 0; axis < grid.rank(); ++axis) {
    const Index n = grid.extent(axis);
    stride /= n;
    line_in.resize(n);
    const Index block = n * stride;
    for (Index outer = 0; outer < grid.size(); outer += block) {
      for (Index inner = 0; inner < stride; ++inner) {
        const Index base = outer + inner;
        for (Index k = 0; k < n; ++k) line_in[k] = data[base + k * stride];
        if (inverse)
          fft.inv(line_out, line_in);
        else
          fft.fwd(line_out, line_in);
        for (Index k = 0; k < n; ++k) data[base + k * stride] = line_out[k];
      }
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// SpectralOperator

SpectralOperator::SpectralOperator(Grid grid, VectorXc eigenvalues, std::string label,
                                   bool self_adjoint, bool positive)
    : grid_(std::move(grid)),
      eigenvalues_(std::move(eigenvalues)),
      label_(std::move(label)),
      self_adjoint_(self_adjoint || positive),
      positive_(positive) {
  if (eigenvalues_.size() != grid_.size())
    throw DimensionError("spectral operator: eigenvalue count does not match grid");
  if (!eigenvalues_.allFinite())
    throw DomainError("spectral operator '" + label_ + "' has non-finite eigenvalues");
  const double scale = std::max(1.0, eigenvalues_.cwiseAbs().maxCoeff());
  if (self_adjoint_ && eigenvalues_.imag().cwiseAbs().maxCoeff() > kFlagTolerance * scale)
    throw PreconditionError("spectral operator '" + label_ +
                            "' flagged self-adjoint but has complex eigenvalues");
  if (positive_ && eigenvalues_.real().minCoeff() < -kFlagTolerance * scale)
    throw PreconditionError("spectral operator '" + label_ +
                            "' flagged positive but has negative eigenvalues");
  if (self_adjoint_) eigenvalues_ = eigenvalues_.real().cast<Complex>();
}

SpectralOperator SpectralOperator::from_symbol(const Grid& grid, const Symbol& symbol,
                                               std::string label, bool self_adjoint,
                                               bool positive) {
  VectorXc ev(grid.size());
  std::vector<double> kappa(grid.rank());
  for (Index i = 0; i < grid.size(); ++i) {
    const auto k = grid.unflatten(i);
    for (Index a = 0; a < grid.rank(); ++a) kappa[a] = grid.angular_frequency(a, k[a]);
    ev[i] = symbol(kappa, k);
  }
  return SpectralOperator(grid, std::move(ev), std::move(label), self_adjoint, positive);
}

SpectralOperator SpectralOperator::identity(const Grid& grid) {
  return SpectralOperator(grid, VectorXc::Ones(grid.size()), "1", true, true);
}

SpectralOperator SpectralOperator::derivative(const Grid& grid, Index axis) {
  if (grid.boundary() != Boundary::periodic)
    throw PreconditionError("spectral derivative needs a periodic grid");
  VectorXc ev(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Index k = grid.coordinate(i, axis);
    ev[i] = grid.is_nyquist(axis, k) ? Complex(0.0)
                                     : Complex(0.0, grid.angular_frequency(axis, k));
  }
  return SpectralOperator(grid, std::move(ev), "D", false, false);
}

SpectralOperator SpectralOperator::minus_second_derivative(const Grid& grid, Index axis) {
  return from_symbol(
      grid,
      [axis](std::span<const double> kappa, std::span<const Index>) {
        return Complex(kappa[axis] * kappa[axis]);
      },
      "-D^2", true, true);
}

SpectralOperator SpectralOperator::velocity_frequency(const TimeLattice& lattice,
                                                      double omega, double lambda) {
  if (lattice.boundary() != Boundary::periodic)
    throw PreconditionError("sqrt(omega^2 - lambda D^2) needs a periodic lattice");
  if (lambda < 0.0) throw PreconditionError("lambda must be non-negative");
  const auto base = minus_second_derivative(lattice.grid()).scaled(lambda) +
                    identity(lattice.grid()).scaled(omega * omega);
  auto root = base.sqrt();
  std::ostringstream label;
  label << "sqrt(" << omega << "^2 - " << lambda << " D^2)";
  return SpectralOperator(lattice.grid(), root.eigenvalues(), label.str(), true, true);
}

bool SpectralOperator::invertible(double tol) const {
  return eigenvalues_.cwiseAbs().minCoeff() > tol;
}

SpectralOperator SpectralOperator::operator*(const SpectralOperator& other) const {
  require_same_grid(grid_, other.grid_, "spectral product");
  // Products of commuting self-adjoint operators stay self-adjoint; positivity
  // is rechecked from the eigenvalues.
  const VectorXc ev = eigenvalues_.cwiseProduct(other.eigenvalues_);
  const bool sa = self_adjoint_ && other.self_adjoint_;
  return SpectralOperator(grid_, ev, label_ + "*" + other.label_, sa,
                          sa && ev.real().minCoeff() >= 0.0);
}

SpectralOperator SpectralOperator::operator+(const SpectralOperator& other) const {
  require_same_grid(grid_, other.grid_, "spectral sum");
  const VectorXc ev = eigenvalues_ + other.eigenvalues_;
  const bool sa = self_adjoint_ && other.self_adjoint_;
  return SpectralOperator(grid_, ev, label_ + "+" + other.label_, sa,
                          sa && ev.real().minCoeff() >= 0.0);
}

SpectralOperator SpectralOperator::scaled(Complex s) const {
  const bool sa = self_adjoint_ && s.imag() == 0.0;
  const VectorXc ev = eigenvalues_ * s;
  std::ostringstream label;
  label << s.real() << "*" << label_;
  return SpectralOperator(grid_, ev, label.str(), sa, sa && ev.real().minCoeff() >= 0.0);
}

SpectralOperator SpectralOperator::sqrt() const {
  const double scale = std::max(1.0, eigenvalues_.cwiseAbs().maxCoeff());
  for (Index i = 0; i < eigenvalues_.size(); ++i) {
    const Complex e = eigenvalues_[i];
    if (std::abs(e.imag()) > kFlagTolerance * scale || e.real() < -kFlagTolerance * scale)
      throw DomainError("square root of non-positive operator '" + label_ + "'");
  }
  VectorXc ev = eigenvalues_.real().cwiseMax(0.0).cwiseSqrt().cast<Complex>();
  return SpectralOperator(grid_, std::move(ev), "sqrt(" + label_ + ")", true, true);
}

SpectralOperator SpectralOperator::inverse() const {
  if (!invertible()) throw SingularOperatorError("operator '" + label_ + "' is singular");
  VectorXc ev = eigenvalues_.cwiseInverse();
  return SpectralOperator(grid_, std::move(ev), "(" + label_ + ")^-1", self_adjoint_,
                          positive_);
}

SpectralOperator SpectralOperator::pow(double exponent) const {
  if (!positive_) throw DomainError("power of non-positive operator '" + label_ + "'");
  if (exponent < 0.0 && !invertible())
    throw SingularOperatorError("negative power of singular operator '" + label_ + "'");
  VectorXc ev(eigenvalues_.size());
  for (Index i = 0; i < ev.size(); ++i)
    ev[i] = std::pow(std::max(eigenvalues_[i].real(), 0.0), exponent);
  std::ostringstream label;
  label << "(" << label_ << ")^" << exponent;
  return SpectralOperator(grid_, std::move(ev), label.str(), true, true);
}

SpectralOperator SpectralOperator::map(const std::function<Complex(Complex)>& fn,
                                       std::string label, bool self_adjoint,
                                       bool positive) const {
  VectorXc ev = eigenvalues_.unaryExpr(fn);
  return SpectralOperator(grid_, std::move(ev), std::move(label), self_adjoint, positive);
}

MatrixXc SpectralOperator::to_matrix() const {
  const Index n = grid_.size();
  MatrixXc m(n, n);
  VectorXc unit = VectorXc::Zero(n);
  for (Index j = 0; j < n; ++j) {
    unit.setZero();
    unit[j] = 1.0;
    m.col(j) = dft(grid_, eigenvalues_.cwiseProduct(dft(grid_, unit)), true);
  }
  if (self_adjoint_) {
    // Hermitian up to FFT rounding; symmetrize so downstream checks see an
    // exactly Hermitian matrix.
    m = (0.5 * (m + m.adjoint())).eval();
  }
  return m;
}

TestFunction spectral_apply(const SpectralOperator& op, const TestFunction& f) {
  require_same_grid(op.grid(), f.grid(), "spectral_apply");
  if (f.grid().boundary() != Boundary::periodic)
    throw PreconditionError("spectral_apply needs a periodic grid");
  VectorXc out = dft(f.grid(), op.eigenvalues().cwiseProduct(dft(f.grid(), f.values())), true);
  return TestFunction(f.grid(), std::move(out));
}

TestFunction derivative(const TestFunction& f) {
  const Grid& g = f.grid();
  if (g.rank() != 1) throw PreconditionError("derivative expects a time lattice");
  if (g.boundary() == Boundary::open) {
    const double tol = 1e-12 * std::max(1.0, f.values().cwiseAbs().maxCoeff());
    if (std::abs(f[0]) > tol || std::abs(f[f.size() - 1]) > tol)
      throw PreconditionError("derivative on an open lattice needs f to vanish at both ends");
    // A function vanishing at both ends extends continuously by periodicity.
    const Grid periodic(g.extents(), g.spacings(), Boundary::periodic);
    const auto d = spectral_apply(SpectralOperator::derivative(periodic),
                                  TestFunction(periodic, f.values()));
    return TestFunction(g, d.values());
  }
  return spectral_apply(SpectralOperator::derivative(g), f);
}

MatrixXc greens_kernel(const SpectralOperator& op) {
  return op.inverse().to_matrix() / op.grid().cell_volume();
}

SpectralOperator build_Kn(const SpacetimeLattice& lattice, double mass) {
  if (!(mass >= 0.0)) throw PreconditionError("mass must be non-negative");
  if (!lattice.has_default_foliation())
    throw UnsupportedFeature("K_n is only realized for the default foliation n = (1,0,0,0)");
  // (eta^{mu nu} - n^mu n^nu) k_mu k_nu with d -> i k flips sign: the time
  // row/column is projected out and each spatial axis contributes +kappa^2.
  const double m2 = mass * mass;
  std::ostringstream label;
  label << "K_n(m=" << mass << ")";
  return SpectralOperator::from_symbol(
      lattice.grid(),
      [m2](std::span<const double> kappa, std::span<const Index>) {
        return Complex(kappa[1] * kappa[1] + kappa[2] * kappa[2] + kappa[3] * kappa[3] + m2);
      },
      label.str(), true, true);
}

}  // namespace hpo
