#pragma once

#include <vector>

#include "hpo/lattice.hpp"
#include "hpo/models.hpp"

namespace hpo {

/// Standard single-time quantum system: Hamiltonian and initial state.
class SingleTimeSystem {
 public:
  SingleTimeSystem(MatrixXc hamiltonian, MatrixXc rho, double hbar = 1.0);

  /// Oscillator truncated to the lowest `levels` states, H = hbar omega (n + 1/2).
  /// The initial state is the pure state (|0> + |1>)/sqrt(2), which does not
  /// commute with position projectors.
  static SingleTimeSystem truncated_oscillator(Index levels, const Units& units);

  Index dimension() const { return hamiltonian_.rows(); }
  const MatrixXc& hamiltonian() const { return hamiltonian_; }
  const MatrixXc& rho() const { return rho_; }
  double hbar() const { return hbar_; }

  /// U(t, t') = exp(-i (t - t') H / hbar).
  MatrixXc evolution(double t, double t_prime) const;

 private:
  MatrixXc hamiltonian_;
  MatrixXc rho_;
  double hbar_;
  Eigen::VectorXd energies_;
  MatrixXc eigenvectors_;
};

/// Position operator sqrt(hbar/2 m omega)(a + a^dag) in the truncated basis.
MatrixXc truncated_position(Index levels, const Units& units);
/// Spectral projectors of the truncated position onto x > 0 and x < 0.
std::pair<MatrixXc, MatrixXc> position_sign_projectors(Index levels, const Units& units);

bool is_projector(const MatrixXc& p, double tol = 1e-12);

/// "alpha_1 at t_1, then ..., then alpha_n at t_n", with t_1 < ... < t_n.
class HistoryProposition {
 public:
  HistoryProposition(std::vector<double> times, std::vector<MatrixXc> projectors);

  const std::vector<double>& times() const { return times_; }
  const std::vector<MatrixXc>& projectors() const { return projectors_; }
  Index length() const { return static_cast<Index>(times_.size()); }
  Index dimension() const { return projectors_.front().rows(); }

  /// Copy with an identity projector inserted at `time`.
  HistoryProposition with_identity_at(double time) const;

 private:
  std::vector<double> times_;
  std::vector<MatrixXc> projectors_;
};

/// Time anchor t_0 of the class operator.
inline constexpr double kTimeAnchor = 0.0;

/// C = U(t0,t1) a_1 U(t1,t2) a_2 ... a_n U(tn,t0).
MatrixXc class_operator(const HistoryProposition& h, const SingleTimeSystem& sys);

/// d(alpha, beta) = tr(C_alpha^dag rho C_beta).
Complex decoherence(const HistoryProposition& alpha, const HistoryProposition& beta,
                    const SingleTimeSystem& sys);

/// Decoherence functional over a list of histories, d(i, j).
MatrixXc decoherence_matrix(const std::vector<HistoryProposition>& histories,
                            const SingleTimeSystem& sys);

/// alpha_1 (x) ... (x) alpha_n on the n-fold tensor product.
MatrixXc hpo_projector(const HistoryProposition& h);

/// Every history built by choosing one projector from `alternatives` at each
/// time; exhaustive and exclusive when each alternative set is.
std::vector<HistoryProposition> complete_history_set(
    const std::vector<double>& times, const std::vector<MatrixXc>& alternatives);

/// Number of eigenvalues above 1/2 of a Hermitian idempotent.
Index projector_rank(const MatrixXc& p);

}  // namespace hpo
