#pragma once

#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hpo/models.hpp"
#include "hpo/quadratic.hpp"

namespace hpo {

using SparseMatrixXc = Eigen::SparseMatrix<Complex>;

/// Largest Fock dimension for which dense matrices are built.
inline constexpr Index kDenseCeiling = 4096;

/// coherent_vector(TestFunction) warns when the dropped part of the norm
/// exceeds this fraction of exp(<phi, phi>).
inline constexpr double kCoherentTailWarning = 1e-3;

/// Occupation-number basis with total occupation <= n_max, ordered graded
/// lexicographically: by total N, then by the occupation tuple.
class FockBasis {
 public:
  using Occupation = std::vector<std::uint8_t>;

  FockBasis(ModeSpacePtr modes, int n_max);

  static std::shared_ptr<const FockBasis> make(ModeSpacePtr modes, int n_max) {
    return std::make_shared<const FockBasis>(std::move(modes), n_max);
  }

  const ModeSpacePtr& modes() const { return modes_; }
  int n_max() const { return n_max_; }
  Index dimension() const { return static_cast<Index>(states_.size()); }
  const Occupation& state(Index i) const { return states_[i]; }
  /// -1 when the occupation is outside the truncation.
  Index index_of(const Occupation& occ) const;
  /// First index and size of the total-occupation-N block.
  Index block_offset(int n) const;
  Index block_size(int n) const;

  /// C(modes + n_max, n_max) without building the basis.
  static double dimension_for(Index modes, int n_max);

 private:
  struct Hash {
    std::size_t operator()(const Occupation& o) const {
      return std::hash<std::string_view>{}(
          std::string_view(reinterpret_cast<const char*>(o.data()), o.size()));
    }
  };

  ModeSpacePtr modes_;
  int n_max_;
  std::vector<Occupation> states_;
  std::vector<Index> block_start_;
  std::unordered_map<Occupation, Index, Hash> index_;
};

using FockBasisPtr = std::shared_ptr<const FockBasis>;

struct FockVector {
  FockBasisPtr basis;
  VectorXc amplitudes;

  Complex inner(const FockVector& other) const;
  double norm() const { return amplitudes.norm(); }
  FockVector normalized() const;
};

/// Matrix of A in the truncated basis; terms that leave the truncation are
/// dropped. Number-conserving operators are represented exactly.
SparseMatrixXc to_matrix(const QuadraticOperator& A, const FockBasis& basis);
/// Dense variant; refuses bases above kDenseCeiling.
MatrixXc to_dense(const QuadraticOperator& A, const FockBasis& basis);

FockVector vacuum(const FockBasisPtr& basis);

/// b^dag_{m_1} ... b^dag_{m_n} |0> for mode indices m_i (repeats allowed),
/// unnormalized as in the delta-normalized basis.
FockVector n_particle_vector(std::span<const Index> modes, const FockBasisPtr& basis);

/// Exponential vector |exp z> = sum_n (1/n!) z^{(x) n}, truncated at n_max;
/// z holds mode amplitudes. Stored unnormalized.
FockVector coherent_vector(const VectorXc& mode_amplitudes, const FockBasisPtr& basis);
/// Same with z_a = sqrt(cell_volume) phi(site_a); needs a scalar mode space.
FockVector coherent_vector(const TestFunction& phi, const FockBasisPtr& basis);

/// sum_{n > n_max} x^n / n! for x >= 0.
double exponential_tail(double x, int n_max);

/// Sorted eigenvalues of the total-occupation-N block of a Hermitian,
/// number-conserving operator.
std::vector<double> spectrum(const QuadraticOperator& A, const FockBasis& basis, int block);

/// <x_f 0 | x_g 0> = <0| x_f^dag x_g |0>, evaluated on Fock vectors.
Complex white_noise_correlation(const TestFunction& f, const TestFunction& g,
                                const FockBasisPtr& basis, const Units& units);

}  // namespace hpo
