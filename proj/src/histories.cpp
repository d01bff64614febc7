#include "hpo/histories.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

namespace hpo {

namespace {

void require_square(const MatrixXc& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError(std::string(what) + " must be a non-empty square matrix");
}

}  // namespace

SingleTimeSystem::SingleTimeSystem(MatrixXc hamiltonian, MatrixXc rho, double hbar)
    : hamiltonian_(std::move(hamiltonian)), rho_(std::move(rho)), hbar_(hbar) {
  require_square(hamiltonian_, "Hamiltonian");
  require_square(rho_, "density matrix");
  if (rho_.rows() != hamiltonian_.rows())
    throw DimensionError("density matrix and Hamiltonian differ in dimension");
  if ((hamiltonian_ - hamiltonian_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw PreconditionError("Hamiltonian is not Hermitian");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw PreconditionError("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - Complex(1.0)) > 1e-12)
    throw PreconditionError("density matrix must have unit trace");
  Eigen::SelfAdjointEigenSolver<MatrixXc> rho_solver(rho_, Eigen::EigenvaluesOnly);
  if (rho_solver.eigenvalues().minCoeff() < -1e-12)
    throw PreconditionError("density matrix is not positive");
  if (!(hbar_ > 0.0)) throw PreconditionError("hbar must be positive");
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(hamiltonian_);
  energies_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

SingleTimeSystem SingleTimeSystem::truncated_oscillator(Index levels, const Units& units) {
  if (levels < 2) throw PreconditionError("truncated oscillator needs at least 2 levels");
  MatrixXc h = MatrixXc::Zero(levels, levels);
  for (Index n = 0; n < levels; ++n)
    h(n, n) = units.hbar * units.omega * (static_cast<double>(n) + 0.5);
  VectorXc psi = VectorXc::Zero(levels);
  psi[0] = psi[1] = 1.0 / std::sqrt(2.0);
  return SingleTimeSystem(std::move(h), psi * psi.adjoint(), units.hbar);
}

MatrixXc SingleTimeSystem::evolution(double t, double t_prime) const {
  VectorXc phases(energies_.size());
  for (Index i = 0; i < phases.size(); ++i)
    phases[i] = std::polar(1.0, -(t - t_prime) * energies_[i] / hbar_);
  return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
}

MatrixXc truncated_position(Index levels, const Units& units) {
  MatrixXc x = MatrixXc::Zero(levels, levels);
  const double scale = std::sqrt(units.hbar / (2.0 * units.mass * units.omega));
  for (Index n = 0; n + 1 < levels; ++n) {
    x(n, n + 1) = scale * std::sqrt(static_cast<double>(n + 1));
    x(n + 1, n) = x(n, n + 1);
  }
  return x;
}

std::pair<MatrixXc, MatrixXc> position_sign_projectors(Index levels, const Units& units) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(truncated_position(levels, units));
  const auto& ev = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  MatrixXc plus = MatrixXc::Zero(levels, levels);
  for (Index i = 0; i < levels; ++i)
    if (ev[i] > 0.0) plus += vecs.col(i) * vecs.col(i).adjoint();
  // Odd truncations have a zero eigenvalue; it goes with x < 0.
  MatrixXc minus = MatrixXc::Identity(levels, levels) - plus;
  return {plus, minus};
}

bool is_projector(const MatrixXc& p, double tol) {
  if (p.rows() != p.cols()) return false;
  return (p * p - p).cwiseAbs().maxCoeff() <= tol &&
         (p - p.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

HistoryProposition::HistoryProposition(std::vector<double> times,
                                       std::vector<MatrixXc> projectors)
    : times_(std::move(times)), projectors_(std::move(projectors)) {
  if (times_.empty()) throw PreconditionError("history needs at least one time");
  if (times_.size() != projectors_.size())
    throw DimensionError("history: one projector per time is required");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw PreconditionError("history times must increase");
  const Index d = projectors_.front().rows();
  for (const auto& p : projectors_) {
    if (p.rows() != d || p.cols() != d) throw DimensionError("history: projector dimensions differ");
    if (!is_projector(p)) throw PreconditionError("history slot is not a projector");
  }
}

HistoryProposition HistoryProposition::with_identity_at(double time) const {
  auto times = times_;
  auto projectors = projectors_;
  const auto it = std::lower_bound(times.begin(), times.end(), time);
  const auto offset = it - times.begin();
  times.insert(it, time);
  projectors.insert(projectors.begin() + offset, MatrixXc::Identity(dimension(), dimension()));
  return HistoryProposition(std::move(times), std::move(projectors));
}

MatrixXc class_operator(const HistoryProposition& h, const SingleTimeSystem& sys) {
  if (h.dimension() != sys.dimension())
    throw DimensionError("history and system differ in dimension");
  double previous = kTimeAnchor;
  MatrixXc c = MatrixXc::Identity(sys.dimension(), sys.dimension());
  for (Index i = 0; i < h.length(); ++i) {
    c = c * sys.evolution(previous, h.times()[i]) * h.projectors()[i];
    previous = h.times()[i];
  }
  return c * sys.evolution(previous, kTimeAnchor);
}

Complex decoherence(const HistoryProposition& alpha, const HistoryProposition& beta,
                    const SingleTimeSystem& sys) {
  const MatrixXc ca = class_operator(alpha, sys);
  const MatrixXc cb = class_operator(beta, sys);
  return (ca.adjoint() * sys.rho() * cb).trace();
}

MatrixXc decoherence_matrix(const std::vector<HistoryProposition>& histories,
                            const SingleTimeSystem& sys) {
  std::vector<MatrixXc> classes;
  classes.reserve(histories.size());
  for (const auto& h : histories) classes.push_back(class_operator(h, sys));
  const Index n = static_cast<Index>(histories.size());
  MatrixXc d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = (classes[i].adjoint() * sys.rho() * classes[j]).trace();
  return d;
}

MatrixXc hpo_projector(const HistoryProposition& h) {
  MatrixXc out = h.projectors().front();
  for (Index i = 1; i < h.length(); ++i)
    out = Eigen::kroneckerProduct(out, h.projectors()[i]).eval();
  return out;
}

std::vector<HistoryProposition> complete_history_set(const std::vector<double>& times,
                                                     const std::vector<MatrixXc>& alternatives) {
  if (alternatives.empty()) throw PreconditionError("no alternatives given");
  std::vector<HistoryProposition> out;
  const std::size_t n = times.size();
  const std::size_t k = alternatives.size();
  std::vector<std::size_t> choice(n, 0);
  while (true) {
    std::vector<MatrixXc> slots;
    for (auto c : choice) slots.push_back(alternatives[c]);
    out.emplace_back(times, std::move(slots));
    bool exhausted = true;
    for (std::size_t pos = n; pos > 0; --pos) {
      if (++choice[pos - 1] < k) {
        exhausted = false;
        break;
      }
      choice[pos - 1] = 0;
    }
    if (exhausted) return out;
  }
}

Index projector_rank(const MatrixXc& p) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(p, Eigen::EigenvaluesOnly);
  return (solver.eigenvalues().array() > 0.5).count();
}

}  // namespace hpo
