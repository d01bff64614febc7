#include "hpo/fock.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iostream>

namespace hpo {

namespace {

void enumerate(FockBasis::Occupation& current, Index position, int remaining,
               std::vector<FockBasis::Occupation>& out) {
  const Index last = static_cast<Index>(current.size()) - 1;
  if (position == last) {
    current[position] = static_cast<std::uint8_t>(remaining);
    out.push_back(current);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    current[position] = static_cast<std::uint8_t>(k);
    enumerate(current, position + 1, remaining - k, out);
  }
  current[position] = 0;
}

double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

/// Collects (row, value) pairs produced by applying normal-ordered monomials
/// to one basis state.
class Applier {
 public:
  Applier(const FockBasis& basis, std::vector<Eigen::Triplet<Complex>>& out)
      : basis_(basis), out_(out) {}

  void set_column(Index col) {
    col_ = col;
    work_ = basis_.state(col);
  }

  void emit(Complex amplitude) {
    if (amplitude == Complex(0.0)) return;
    const Index row = basis_.index_of(work_);
    if (row >= 0) out_.emplace_back(row, col_, amplitude);
  }

  /// Returns sqrt(n) and lowers, or 0 when empty.
  double lower(Index mode) {
    const int n = work_[mode];
    if (n == 0) return 0.0;
    work_[mode] = static_cast<std::uint8_t>(n - 1);
    return std::sqrt(static_cast<double>(n));
  }
  double raise(Index mode) {
    const int n = work_[mode];
    work_[mode] = static_cast<std::uint8_t>(n + 1);
    return std::sqrt(static_cast<double>(n + 1));
  }
  void restore() { work_ = basis_.state(col_); }
  int occupation(Index mode) const { return work_[mode]; }
  int total() const {
    int s = 0;
    for (auto n : work_) s += n;
    return s;
  }

 private:
  const FockBasis& basis_;
  std::vector<Eigen::Triplet<Complex>>& out_;
  Index col_ = 0;
  FockBasis::Occupation work_;
};

}  // namespace

// ---------------------------------------------------------------------------

FockBasis::FockBasis(ModeSpacePtr modes, int n_max) : modes_(std::move(modes)), n_max_(n_max) {
  if (!modes_) throw PreconditionError("Fock basis without a mode space");
  if (n_max_ < 0) throw PreconditionError("n_max must be non-negative");
  if (n_max_ > 255) throw CapacityError("n_max above 255 is not supported");
  const double dim = dimension_for(modes_->size(), n_max_);
  if (dim > 5.0e6) throw CapacityError("Fock basis dimension too large");
  states_.reserve(static_cast<std::size_t>(dim));
  Occupation current(static_cast<std::size_t>(modes_->size()), 0);
  for (int n = 0; n <= n_max_; ++n) {
    block_start_.push_back(static_cast<Index>(states_.size()));
    enumerate(current, 0, n, states_);
  }
  block_start_.push_back(static_cast<Index>(states_.size()));
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], static_cast<Index>(i));
}

Index FockBasis::index_of(const Occupation& occ) const {
  const auto it = index_.find(occ);
  return it == index_.end() ? -1 : it->second;
}

Index FockBasis::block_offset(int n) const {
  if (n < 0 || n > n_max_) throw CapacityError("occupation block outside truncation");
  return block_start_[n];
}

Index FockBasis::block_size(int n) const {
  if (n < 0 || n > n_max_) throw CapacityError("occupation block outside truncation");
  return block_start_[n + 1] - block_start_[n];
}

double FockBasis::dimension_for(Index modes, int n_max) {
  // C(modes + n_max, n_max)
  double c = 1.0;
  for (int k = 1; k <= n_max; ++k)
    c = c * static_cast<double>(modes + k) / static_cast<double>(k);
  return std::round(c);
}

Complex FockVector::inner(const FockVector& other) const {
  if (basis != other.basis && !(basis && other.basis && basis->dimension() == other.basis->dimension()))
    throw DimensionError("Fock vectors live in different bases");
  return amplitudes.dot(other.amplitudes);
}

FockVector FockVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw DomainError("cannot normalize the zero vector");
  return {basis, amplitudes / n};
}

// ---------------------------------------------------------------------------

SparseMatrixXc to_matrix(const QuadraticOperator& A, const FockBasis& basis) {
  if (!same_modes(A.modes(), basis.modes()))
    throw DimensionError("to_matrix: operator and basis use different mode spaces");
  const Index k = A.size();
  const Index dim = basis.dimension();
  std::vector<Eigen::Triplet<Complex>> triplets;
  Applier apply(basis, triplets);

  const auto& alpha = A.create();
  const auto& beta = A.annihilate();
  const auto& M = A.number();
  const auto& P = A.pair_create();
  const auto& Q = A.pair_annihilate();
  std::vector<Index> alpha_nz, beta_nz;
  for (Index i = 0; i < k; ++i) {
    if (alpha[i] != Complex(0.0)) alpha_nz.push_back(i);
    if (beta[i] != Complex(0.0)) beta_nz.push_back(i);
  }
  // Sparse views of the matrices keep the inner loops proportional to the
  // number of nonzero couplings.
  auto nonzeros = [k](const MatrixXc& m, bool upper_only) {
    std::vector<std::tuple<Index, Index, Complex>> nz;
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < k; ++i)
        if ((!upper_only || i <= j) && m(i, j) != Complex(0.0)) nz.emplace_back(i, j, m(i, j));
    return nz;
  };
  const auto M_nz = nonzeros(M, false);
  const auto P_nz = nonzeros(P, true);
  const auto Q_nz = nonzeros(Q, true);

  for (Index col = 0; col < dim; ++col) {
    apply.set_column(col);
    if (A.scalar() != Complex(0.0)) apply.emit(A.scalar());
    for (Index i : alpha_nz) {
      const double r = apply.raise(i);
      apply.emit(alpha[i] * r);
      apply.restore();
    }
    for (Index i : beta_nz) {
      const double r = apply.lower(i);
      apply.emit(beta[i] * r);
      apply.restore();
    }
    for (const auto& [i, j, v] : M_nz) {
      if (i == j) {  // b_i^dag b_i is diagonal; keep the occupation exact
        apply.emit(v * static_cast<double>(apply.occupation(i)));
        continue;
      }
      double r = apply.lower(j);
      if (r != 0.0) {
        r *= apply.raise(i);
        apply.emit(v * r);
      }
      apply.restore();
    }
    // 1/2 sum_ij P_ij b_i^dag b_j^dag = sum_{i<j} P_ij b_i^dag b_j^dag + 1/2 sum_i P_ii (b_i^dag)^2
    for (const auto& [i, j, v] : P_nz) {
      if (apply.total() + 2 > basis.n_max()) break;
      double r = apply.raise(j);
      r *= apply.raise(i);
      apply.emit((i == j ? 0.5 : 1.0) * v * r);
      apply.restore();
    }
    for (const auto& [i, j, v] : Q_nz) {
      double r = apply.lower(j);
      if (r != 0.0) {
        const double r2 = apply.lower(i);
        if (r2 != 0.0) apply.emit((i == j ? 0.5 : 1.0) * v * r * r2);
      }
      apply.restore();
    }
  }
  SparseMatrixXc m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

MatrixXc to_dense(const QuadraticOperator& A, const FockBasis& basis) {
  if (basis.dimension() > kDenseCeiling)
    throw CapacityError("Fock dimension " + std::to_string(basis.dimension()) +
                        " exceeds the dense ceiling; use the sparse path");
  return MatrixXc(to_matrix(A, basis));
}

FockVector vacuum(const FockBasisPtr& basis) {
  VectorXc v = VectorXc::Zero(basis->dimension());
  v[0] = 1.0;
  return {basis, std::move(v)};
}

FockVector n_particle_vector(std::span<const Index> modes, const FockBasisPtr& basis) {
  if (static_cast<int>(modes.size()) > basis->n_max())
    throw CapacityError("n-particle state exceeds the occupation cutoff");
  FockBasis::Occupation occ(static_cast<std::size_t>(basis->modes()->size()), 0);
  for (Index m : modes) {
    if (m < 0 || m >= basis->modes()->size()) throw DimensionError("mode index out of range");
    ++occ[static_cast<std::size_t>(m)];
  }
  double amplitude = 1.0;
  for (auto n : occ) amplitude *= std::sqrt(factorial(n));
  VectorXc v = VectorXc::Zero(basis->dimension());
  v[basis->index_of(occ)] = amplitude;
  return {basis, std::move(v)};
}

FockVector coherent_vector(const VectorXc& z, const FockBasisPtr& basis) {
  if (z.size() != basis->modes()->size()) throw DimensionError("coherent amplitude length");
  VectorXc v(basis->dimension());
  for (Index s = 0; s < basis->dimension(); ++s) {
    const auto& occ = basis->state(s);
    Complex amp = 1.0;
    for (std::size_t i = 0; i < occ.size(); ++i)
      if (occ[i] > 0) amp *= std::pow(z[static_cast<Index>(i)], static_cast<int>(occ[i])) /
                             std::sqrt(factorial(occ[i]));
    v[s] = amp;
  }
  return {basis, std::move(v)};
}

FockVector coherent_vector(const TestFunction& phi, const FockBasisPtr& basis) {
  const auto& modes = basis->modes();
  if (modes->components() != 1)
    throw PreconditionError("coherent_vector(TestFunction) needs a scalar mode space");
  if (!(modes->grid() == phi.grid())) throw DimensionError("coherent_vector: lattice mismatch");
  const VectorXc z = std::sqrt(modes->cell_volume()) * phi.values();
  const double tail = exponential_tail(z.squaredNorm(), basis->n_max());
  if (tail > kCoherentTailWarning * std::exp(z.squaredNorm()))
    std::clog << "warning: coherent vector truncated at n_max=" << basis->n_max()
              << " drops relative weight " << tail / std::exp(z.squaredNorm()) << "\n";
  return coherent_vector(z, basis);
}

double exponential_tail(double x, int n_max) {
  if (x < 0.0) throw PreconditionError("exponential_tail expects x >= 0");
  double term = 1.0;
  for (int n = 1; n <= n_max; ++n) term *= x / n;
  double sum = 0.0;
  for (int n = n_max + 1; n < n_max + 400; ++n) {
    term *= x / n;
    sum += term;
    if (term <= 1e-18 * sum) break;
  }
  return sum;
}

std::vector<double> spectrum(const QuadraticOperator& A, const FockBasis& basis, int block) {
  if (!A.is_hermitian(1e-12)) throw PreconditionError("spectrum: operator is not Hermitian");
  if (!A.is_number_conserving(1e-14))
    throw PreconditionError("spectrum: block request needs a number-conserving operator");
  const Index offset = basis.block_offset(block);
  const Index size = basis.block_size(block);
  const SparseMatrixXc m = to_matrix(A, basis);
  const MatrixXc sub = MatrixXc(m.block(offset, offset, size, size));
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(sub, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

Complex white_noise_correlation(const TestFunction& f, const TestFunction& g,
                                const FockBasisPtr& basis, const Units& units) {
  if (basis->n_max() < 1) throw CapacityError("white-noise correlation needs n_max >= 1");
  const auto& modes = basis->modes();
  const FockVector zero = vacuum(basis);
  const VectorXc xf = to_matrix(smear_position(modes, f, units), *basis) * zero.amplitudes;
  const VectorXc xg = to_matrix(smear_position(modes, g, units), *basis) * zero.amplitudes;
  return xf.dot(xg);
}

}  // namespace hpo
