#pragma once

#include <optional>

#include "hpo/lattice.hpp"
#include "hpo/quadratic.hpp"

namespace hpo {

/// Physical constants. The identities checked here are structural, so the
/// defaults are natural units.
struct Units {
  double hbar = 1.0;
  double mass = 1.0;
  double omega = 1.0;
};

// --- single-particle history algebra --------------------------------------
//
// Discrete modes are dimensionless. A lattice field at site a is
// b_a / sqrt(cell_volume), so smearing with f carries a factor sqrt(cell_volume)
// and [b_f, b_g^dag] = <f, g> holds exactly.

/// b_f = sum sqrt(v) conj(f_a) b_a (antilinear in f).
QuadraticOperator annihilator(const ModeSpacePtr& modes, const TestFunction& f,
                              Index component = 0);
/// b_f^dag.
QuadraticOperator creator(const ModeSpacePtr& modes, const TestFunction& f,
                          Index component = 0);

/// x_f = sum v f_a x_a with x_a = sqrt(hbar/2m omega)(b_a + b_a^dag)/sqrt(v).
/// Complex-linear in f; Hermitian for real f.
QuadraticOperator smear_position(const ModeSpacePtr& modes, const TestFunction& f,
                                 const Units& units, Index component = 0);
/// p_f = sum v f_a p_a with p_a = i sqrt(m omega hbar/2)(b_a^dag - b_a)/sqrt(v).
QuadraticOperator smear_momentum(const ModeSpacePtr& modes, const TestFunction& f,
                                 const Units& units, Index component = 0);

/// H(chi) = hbar omega sum chi_a b_a^dag b_a, summed over internal components.
QuadraticOperator build_H(const ModeSpacePtr& modes, const TestFunction& chi,
                          const Units& units);

/// sum t_a b_a^dag b_a; eigenvalue t_1 + ... + t_n on |t_1, ..., t_n>.
QuadraticOperator build_center_of_time(const ModeSpacePtr& modes);

/// U(chi) = diag(exp(-i omega chi_a)); conjugation by exp(iH(chi)/hbar).
OneParticleUnitary oscillator_evolution(const ModeSpacePtr& modes, const TestFunction& chi,
                                        const Units& units);

/// Point-split angular momentum on a mode space with three internal components:
///
///   L^i = -i hbar eps_ijk sum_t weight(t) conj-phase b^j_t^dag b^k_{t+eps}
///
/// where b^k_{chi,t} = exp(-i omega chi(t)) b^k_t dresses both factors. The
/// sign makes L = x cross p, so [L^1, L^2] -> i hbar L^3 as eps -> 0.
/// weight defaults to 1. Shifts wrap on periodic lattices; on open lattices
/// terms past the end are dropped.
QuadraticOperator build_angular_momentum(const ModeSpacePtr& modes, int axis,
                                         const TestFunction& chi, Index eps_steps,
                                         const Units& units,
                                         const std::optional<TestFunction>& weight = {});

// --- velocity-extended oscillator ------------------------------------------

/// Operators of the velocity-extended oscillator, expressed in the c-mode basis
/// that diagonalizes Omega = sqrt(omega^2 - lambda D^2).
class VelocityExtendedModel {
 public:
  VelocityExtendedModel(ModeSpacePtr modes, double lambda, const Units& units);

  const ModeSpacePtr& modes() const { return modes_; }
  const SpectralOperator& frequency() const { return frequency_; }
  double lambda() const { return lambda_; }

  QuadraticOperator position(const TestFunction& f) const;
  QuadraticOperator momentum(const TestFunction& f) const;
  /// xdot_f := -x_{Df}.
  QuadraticOperator velocity(const TestFunction& f) const;
  /// c_f = sum sqrt(v) conj(f_a) c_a.
  QuadraticOperator annihilator(const TestFunction& f) const;
  /// hbar sum c^dag [(chi Omega + Omega chi)/2] c.
  QuadraticOperator hamiltonian(const TestFunction& chi) const;
  /// exp(-i chi Omega) for constant chi.
  OneParticleUnitary evolution(double chi) const;

 private:
  ModeSpacePtr modes_;
  double lambda_;
  Units units_;
  SpectralOperator frequency_;
  MatrixXc omega_;
  MatrixXc omega_inv_sqrt_;
  MatrixXc omega_sqrt_;
};

QuadraticOperator build_H_velocity_extended(const ModeSpacePtr& modes, const TestFunction& chi,
                                            double lambda, const Units& units);

// --- free scalar field histories -------------------------------------------

/// Free field on a 4D history lattice. Modes b(X) = (K^{1/4} phi + i K^{-1/4} pi)
/// / sqrt(2 hbar) are dimensionless; smeared fields carry sqrt(cell_volume).
class FreeFieldModel {
 public:
  FreeFieldModel(const SpacetimeLattice& lattice, double mass, const Units& units);

  const ModeSpacePtr& modes() const { return modes_; }
  const SpacetimeLattice& lattice() const { return lattice_; }
  const SpectralOperator& Kn() const { return kn_; }

  QuadraticOperator field(const TestFunction& f) const;
  QuadraticOperator conjugate_momentum(const TestFunction& f) const;
  /// b(f) = sum sqrt(v) conj(f_a) b_a.
  QuadraticOperator annihilator(const TestFunction& f) const;
  /// H_n(chi) = hbar sum b^dag (chi(n.X) sqrt(K_n)) b.
  QuadraticOperator hamiltonian(const TestFunction& chi_time) const;
  /// exp(-i chi(n.X) sqrt(K_n)), assembled slice by slice.
  OneParticleUnitary evolution(const TestFunction& chi_time) const;
  /// Lifts a function of time to the grid, X -> chi(n.X).
  TestFunction lift(const TestFunction& chi_time) const;

 private:
  const MatrixXc& quarter() const;
  const MatrixXc& inverse_quarter() const;

  SpacetimeLattice lattice_;
  double mass_;
  Units units_;
  ModeSpacePtr modes_;
  SpectralOperator kn_;
  MatrixXc sqrt_k_;
  mutable std::optional<MatrixXc> quarter_;
  mutable std::optional<MatrixXc> inverse_quarter_;
};

QuadraticOperator build_qft_hamiltonian(const TestFunction& chi_time,
                                        const SpacetimeLattice& lattice, double mass,
                                        const Units& units);

}  // namespace hpo
