#include "hpo/models.hpp"

#include <cmath>

namespace hpo {

namespace {

void require_grid(const ModeSpacePtr& modes, const TestFunction& f, const char* what) {
  if (!modes) throw PreconditionError(std::string(what) + ": no mode space");
  if (!(modes->grid() == f.grid()))
    throw DimensionError(std::string(what) + ": test function lives on a different lattice");
}

void require_component(const ModeSpacePtr& modes, Index component) {
  if (component < 0 || component >= modes->components())
    throw DimensionError("internal component out of range");
}

void require_real(const TestFunction& f, const char* what) {
  if (!f.is_real(1e-14)) throw PreconditionError(std::string(what) + " must be real-valued");
}

/// Spreads site values onto the modes of one component.
VectorXc on_component(const ModeSpacePtr& modes, const VectorXc& site_values, Index component) {
  VectorXc v = VectorXc::Zero(modes->size());
  for (Index s = 0; s < modes->sites(); ++s) v[modes->mode(s, component)] = site_values[s];
  return v;
}

MatrixXc block_diagonal(const MatrixXc& block, Index copies) {
  const Index s = block.rows();
  MatrixXc out = MatrixXc::Zero(s * copies, s * copies);
  for (Index t = 0; t < copies; ++t) out.block(t * s, t * s, s, s) = block;
  return out;
}

int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((i - j) * (j - k) * (k - i) > 0) ? 1 : -1;
}

}  // namespace

// ---------------------------------------------------------------------------

QuadraticOperator annihilator(const ModeSpacePtr& modes, const TestFunction& f, Index component) {
  require_grid(modes, f, "annihilator");
  require_component(modes, component);
  const double w = std::sqrt(modes->cell_volume());
  return QuadraticOperator::linear(modes, VectorXc::Zero(modes->size()),
                                   on_component(modes, w * f.values().conjugate(), component));
}

QuadraticOperator creator(const ModeSpacePtr& modes, const TestFunction& f, Index component) {
  return annihilator(modes, f, component).adjoint();
}

QuadraticOperator smear_position(const ModeSpacePtr& modes, const TestFunction& f,
                                 const Units& units, Index component) {
  require_grid(modes, f, "smear_position");
  require_component(modes, component);
  const double scale =
      std::sqrt(units.hbar / (2.0 * units.mass * units.omega) * modes->cell_volume());
  const VectorXc c = on_component(modes, scale * f.values(), component);
  return QuadraticOperator::linear(modes, c, c);
}

QuadraticOperator smear_momentum(const ModeSpacePtr& modes, const TestFunction& f,
                                 const Units& units, Index component) {
  require_grid(modes, f, "smear_momentum");
  require_component(modes, component);
  const double scale =
      std::sqrt(units.mass * units.omega * units.hbar / 2.0 * modes->cell_volume());
  const VectorXc c = on_component(modes, scale * f.values(), component);
  const Complex i(0.0, 1.0);
  return QuadraticOperator::linear(modes, i * c, -i * c);
}

QuadraticOperator build_H(const ModeSpacePtr& modes, const TestFunction& chi,
                          const Units& units) {
  require_grid(modes, chi, "build_H");
  require_real(chi, "H(chi): chi");
  VectorXc diag(modes->size());
  for (Index a = 0; a < modes->size(); ++a)
    diag[a] = units.hbar * units.omega * chi[modes->label(a).site].real();
  return QuadraticOperator::number_conserving(modes, diag.asDiagonal().toDenseMatrix());
}

QuadraticOperator build_center_of_time(const ModeSpacePtr& modes) {
  if (!modes) throw PreconditionError("center of time: no mode space");
  const Grid& g = modes->grid();
  VectorXc diag(modes->size());
  for (Index a = 0; a < modes->size(); ++a)
    diag[a] = static_cast<double>(g.coordinate(modes->label(a).site, 0)) * g.spacing(0);
  return QuadraticOperator::number_conserving(modes, diag.asDiagonal().toDenseMatrix());
}

OneParticleUnitary oscillator_evolution(const ModeSpacePtr& modes, const TestFunction& chi,
                                        const Units& units) {
  require_grid(modes, chi, "oscillator_evolution");
  require_real(chi, "U(chi): chi");
  Eigen::VectorXd phase(modes->size());
  for (Index a = 0; a < modes->size(); ++a)
    phase[a] = units.omega * chi[modes->label(a).site].real();
  return OneParticleUnitary::phases(modes, phase);
}

QuadraticOperator build_angular_momentum(const ModeSpacePtr& modes, int axis,
                                         const TestFunction& chi, Index eps_steps,
                                         const Units& units,
                                         const std::optional<TestFunction>& weight) {
  require_grid(modes, chi, "build_angular_momentum");
  if (modes->components() != 3)
    throw PreconditionError("angular momentum needs a mode space with internal index of size 3");
  if (modes->grid().rank() != 1)
    throw PreconditionError("angular momentum is defined on a time lattice");
  if (axis < 1 || axis > 3) throw PreconditionError("angular momentum axis must be 1, 2 or 3");
  require_real(chi, "angular momentum: chi");
  const Index n = modes->sites();
  if (eps_steps < 0 || eps_steps >= n)
    throw PreconditionError("point-splitting distance outside the lattice");
  if (weight) require_grid(modes, *weight, "build_angular_momentum weight");

  const bool periodic = modes->grid().boundary() == Boundary::periodic;
  const Complex prefactor(0.0, -units.hbar);
  MatrixXc m = MatrixXc::Zero(modes->size(), modes->size());
  for (Index t = 0; t < n; ++t) {
    Index shifted = t + eps_steps;
    if (shifted >= n) {
      if (!periodic) continue;
      shifted -= n;
    }
    const Complex w = weight ? (*weight)[t] : Complex(1.0);
    const Complex phase =
        std::polar(1.0, units.omega * (chi[t].real() - chi[shifted].real()));
    for (int j = 1; j <= 3; ++j)
      for (int k = 1; k <= 3; ++k) {
        const int e = levi_civita(axis, j, k);
        if (e == 0) continue;
        m(modes->mode(t, j - 1), modes->mode(shifted, k - 1)) +=
            prefactor * static_cast<double>(e) * w * phase;
      }
  }
  return QuadraticOperator::number_conserving(modes, std::move(m));
}

// ---------------------------------------------------------------------------

VelocityExtendedModel::VelocityExtendedModel(ModeSpacePtr modes, double lambda,
                                             const Units& units)
    : modes_(std::move(modes)),
      lambda_(lambda),
      units_(units),
      frequency_([&] {
        if (!modes_) throw PreconditionError("velocity model: no mode space");
        if (modes_->grid().rank() != 1 || modes_->components() != 1)
          throw PreconditionError("velocity model lives on a scalar time lattice");
        if (modes_->grid().boundary() != Boundary::periodic)
          throw PreconditionError("velocity-extended energy needs a periodic lattice");
        const Grid& g = modes_->grid();
        return SpectralOperator::velocity_frequency(
            TimeLattice(g.extent(0), g.spacing(0), Boundary::periodic), units.omega, lambda);
      }()) {
  if (!frequency_.invertible())
    throw SingularOperatorError("sqrt(omega^2 - lambda D^2) is singular (omega = 0?)");
  omega_ = frequency_.to_matrix();
  omega_sqrt_ = frequency_.pow(0.5).to_matrix();
  omega_inv_sqrt_ = frequency_.pow(-0.5).to_matrix();
}

QuadraticOperator VelocityExtendedModel::position(const TestFunction& f) const {
  require_grid(modes_, f, "velocity model position");
  const double scale = std::sqrt(units_.hbar / (2.0 * units_.mass) * modes_->cell_volume());
  const VectorXc c = scale * (omega_inv_sqrt_.transpose() * f.values());
  return QuadraticOperator::linear(modes_, c, c);
}

QuadraticOperator VelocityExtendedModel::momentum(const TestFunction& f) const {
  require_grid(modes_, f, "velocity model momentum");
  const double scale = std::sqrt(units_.hbar * units_.mass / 2.0 * modes_->cell_volume());
  const VectorXc c = scale * (omega_sqrt_.transpose() * f.values());
  const Complex i(0.0, 1.0);
  return QuadraticOperator::linear(modes_, i * c, -i * c);
}

QuadraticOperator VelocityExtendedModel::velocity(const TestFunction& f) const {
  return -position(derivative(f));
}

QuadraticOperator VelocityExtendedModel::annihilator(const TestFunction& f) const {
  return hpo::annihilator(modes_, f);
}

QuadraticOperator VelocityExtendedModel::hamiltonian(const TestFunction& chi) const {
  require_grid(modes_, chi, "velocity-extended H");
  require_real(chi, "velocity-extended H: chi");
  const auto chi_hat = chi.values().asDiagonal();
  MatrixXc m = 0.5 * units_.hbar * (chi_hat * omega_ + omega_ * chi_hat);
  return QuadraticOperator::number_conserving(modes_, std::move(m));
}

OneParticleUnitary VelocityExtendedModel::evolution(double chi) const {
  const auto u = frequency_.map(
      [chi](Complex w) { return std::exp(Complex(0.0, -chi) * w); }, "exp(-i chi Omega)", false,
      false);
  return OneParticleUnitary(modes_, u.to_matrix());
}

QuadraticOperator build_H_velocity_extended(const ModeSpacePtr& modes, const TestFunction& chi,
                                            double lambda, const Units& units) {
  return VelocityExtendedModel(modes, lambda, units).hamiltonian(chi);
}

// ---------------------------------------------------------------------------

namespace {

SpectralOperator spatial_kn(const SpacetimeLattice& lattice, double mass) {
  const Grid& g = lattice.grid();
  const Grid spatial({g.extent(1), g.extent(2), g.extent(3)},
                     {g.spacing(1), g.spacing(2), g.spacing(3)}, Boundary::periodic);
  const double m2 = mass * mass;
  return SpectralOperator::from_symbol(
      spatial,
      [m2](std::span<const double> kappa, std::span<const Index>) {
        return Complex(kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2] + m2);
      },
      "K_spatial", true, true);
}

}  // namespace

FreeFieldModel::FreeFieldModel(const SpacetimeLattice& lattice, double mass, const Units& units)
    : lattice_(lattice),
      mass_(mass),
      units_(units),
      modes_(ModeSpace::on(lattice)),
      kn_(build_Kn(lattice, mass)) {
  // K_n acts trivially along n, so every operator below is block diagonal
  // over time slices with identical spatial blocks.
  sqrt_k_ = block_diagonal(spatial_kn(lattice_, mass_).sqrt().to_matrix(),
                           lattice_.grid().extent(0));
}

const MatrixXc& FreeFieldModel::quarter() const {
  if (!quarter_)
    quarter_ = block_diagonal(spatial_kn(lattice_, mass_).pow(0.25).to_matrix(),
                              lattice_.grid().extent(0));
  return *quarter_;
}

const MatrixXc& FreeFieldModel::inverse_quarter() const {
  if (!inverse_quarter_)
    inverse_quarter_ = block_diagonal(spatial_kn(lattice_, mass_).pow(-0.25).to_matrix(),
                                      lattice_.grid().extent(0));
  return *inverse_quarter_;
}

TestFunction FreeFieldModel::lift(const TestFunction& chi_time) const {
  const TimeLattice axis = lattice_.time_axis();
  if (!(chi_time.grid() == axis.grid()))
    throw DimensionError("chi must live on the time axis of the spacetime lattice");
  const Grid& g = lattice_.grid();
  VectorXc v(g.size());
  for (Index a = 0; a < g.size(); ++a) v[a] = chi_time[g.coordinate(a, 0)];
  return TestFunction(g, std::move(v));
}

QuadraticOperator FreeFieldModel::field(const TestFunction& f) const {
  require_grid(modes_, f, "field");
  const double scale = std::sqrt(units_.hbar / 2.0 * modes_->cell_volume());
  const VectorXc c = scale * (inverse_quarter().transpose() * f.values());
  return QuadraticOperator::linear(modes_, c, c);
}

QuadraticOperator FreeFieldModel::conjugate_momentum(const TestFunction& f) const {
  require_grid(modes_, f, "conjugate_momentum");
  const double scale = std::sqrt(units_.hbar / 2.0 * modes_->cell_volume());
  const VectorXc c = scale * (quarter().transpose() * f.values());
  const Complex i(0.0, 1.0);
  return QuadraticOperator::linear(modes_, i * c, -i * c);
}

QuadraticOperator FreeFieldModel::annihilator(const TestFunction& f) const {
  return hpo::annihilator(modes_, f);
}

QuadraticOperator FreeFieldModel::hamiltonian(const TestFunction& chi_time) const {
  if (!lattice_.has_default_foliation())
    throw UnsupportedFeature("H_n(chi) is only realized for the default foliation");
  require_real(chi_time, "H_n(chi): chi");
  const TestFunction chi = lift(chi_time);
  MatrixXc m = units_.hbar * (chi.values().asDiagonal() * sqrt_k_);
  return QuadraticOperator::number_conserving(modes_, std::move(m));
}

OneParticleUnitary FreeFieldModel::evolution(const TestFunction& chi_time) const {
  require_real(chi_time, "U(chi): chi");
  lift(chi_time);  // validates the time axis
  const auto root = spatial_kn(lattice_, mass_).sqrt();
  const Index slices = lattice_.grid().extent(0);
  const Index s = lattice_.slice_size();
  MatrixXc u = MatrixXc::Zero(modes_->size(), modes_->size());
  for (Index t = 0; t < slices; ++t) {
    const double c = chi_time[t].real();
    u.block(t * s, t * s, s, s) =
        root.map([c](Complex w) { return std::exp(Complex(0.0, -c) * w); }, "U", false, false)
            .to_matrix();
  }
  return OneParticleUnitary(modes_, std::move(u), 1e-10);
}

QuadraticOperator build_qft_hamiltonian(const TestFunction& chi_time,
                                        const SpacetimeLattice& lattice, double mass,
                                        const Units& units) {
  if (!lattice.has_default_foliation())
    throw UnsupportedFeature("H_n(chi) is only realized for the default foliation");
  return FreeFieldModel(lattice, mass, units).hamiltonian(chi_time);
}

}  // namespace hpo
