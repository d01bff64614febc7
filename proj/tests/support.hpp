#pragma once

// Independent oracles and random generators shared by the unit tests. Nothing
// here calls the FFT or the commutator engine.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "hpo/lattice.hpp"
#include "hpo/quadratic.hpp"

namespace hpo::test {

inline Eigen::VectorXd random_real(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline VectorXc random_complex(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  VectorXc v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(u(rng), u(rng));
  return v;
}

inline MatrixXc random_matrix(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  MatrixXc m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = Complex(u(rng), u(rng));
  return m;
}

inline TestFunction random_function(std::mt19937_64& rng, const TimeLattice& lattice,
                                    bool real = true) {
  return real ? TestFunction(lattice, random_real(rng, lattice.n_points()).cast<Complex>())
              : TestFunction(lattice, random_complex(rng, lattice.n_points()));
}

/// General quadratic operator with every component populated.
inline QuadraticOperator random_quadratic(std::mt19937_64& rng, const ModeSpacePtr& modes,
                                          double scale = 1.0) {
  const Index n = modes->size();
  std::uniform_real_distribution<double> u(-scale, scale);
  return QuadraticOperator(modes, Complex(u(rng), u(rng)), random_complex(rng, n, scale),
                           random_complex(rng, n, scale), random_matrix(rng, n, scale),
                           random_matrix(rng, n, scale), random_matrix(rng, n, scale));
}

inline QuadraticOperator random_hermitian(std::mt19937_64& rng, const ModeSpacePtr& modes,
                                          double scale = 1.0) {
  const auto a = random_quadratic(rng, modes, scale);
  return (a + a.adjoint()) * Complex(0.5);
}

/// Unitary DFT matrix F_jk = exp(-2 pi i j k / N) / sqrt(N), by direct summation.
inline MatrixXc dft_matrix(Index n) {
  MatrixXc f(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k)
      f(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                           -2.0 * std::numbers::pi * static_cast<double>(j * k) /
                               static_cast<double>(n));
  return f;
}

/// Dense matrix of the 1D operator with eigenvalue sym(k) on Fourier index k.
inline MatrixXc circulant_from_symbol(Index n, const std::function<Complex(Index)>& sym) {
  const MatrixXc f = dft_matrix(n);
  VectorXc d(n);
  for (Index k = 0; k < n; ++k) d[k] = sym(k);
  return f.adjoint() * d.asDiagonal() * f;
}

/// Angular frequency of Fourier index k, wrapped into (-N/2, N/2].
inline double wrapped_frequency(Index n, double spacing, Index k) {
  const Index w = (2 * k <= n) ? k : k - n;
  return 2.0 * std::numbers::pi * static_cast<double>(w) / (static_cast<double>(n) * spacing);
}

inline double max_abs(const MatrixXc& m) { return m.cwiseAbs().maxCoeff(); }

/// Dense ladder-operator representation on a per-mode cutoff: every mode keeps
/// occupations 0..levels-1 and b_i = 1 (x) ... (x) a (x) ... (x) 1. Products of
/// these matrices are exact on states whose occupations stay two below the
/// cutoff, which is where comparisons against the symbolic engine are made.
class DenseLadder {
 public:
  DenseLadder(Index modes, Index levels) : modes_(modes), levels_(levels) {
    dim_ = 1;
    for (Index i = 0; i < modes; ++i) dim_ *= levels;
    MatrixXc a = MatrixXc::Zero(levels, levels);
    for (Index n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    for (Index i = 0; i < modes; ++i) {
      MatrixXc op = MatrixXc::Identity(1, 1);
      for (Index j = 0; j < modes; ++j) {
        const MatrixXc factor = (i == j) ? a : MatrixXc::Identity(levels, levels);
        MatrixXc next(op.rows() * levels, op.cols() * levels);
        for (Index r = 0; r < op.rows(); ++r)
          for (Index c = 0; c < op.cols(); ++c)
            next.block(r * levels, c * levels, levels, levels) = op(r, c) * factor;
        op = next;
      }
      lower_.push_back(op);
    }
  }

  Index dimension() const { return dim_; }

  MatrixXc represent(const QuadraticOperator& A) const {
    MatrixXc out = A.scalar() * MatrixXc::Identity(dim_, dim_);
    for (Index i = 0; i < modes_; ++i) {
      const MatrixXc up = lower_[i].adjoint();
      out += A.create()[i] * up + A.annihilate()[i] * lower_[i];
      for (Index j = 0; j < modes_; ++j) {
        out += A.number()(i, j) * (up * lower_[j]);
        out += 0.5 * A.pair_create()(i, j) * (up * lower_[j].adjoint());
        out += 0.5 * A.pair_annihilate()(i, j) * (lower_[i] * lower_[j]);
      }
    }
    return out;
  }

  /// Indices of product states with every occupation <= bound.
  std::vector<Index> low_states(Index bound) const {
    std::vector<Index> out;
    for (Index s = 0; s < dim_; ++s) {
      Index rest = s;
      bool ok = true;
      for (Index i = 0; i < modes_; ++i) {
        if (rest % levels_ > bound) ok = false;
        rest /= levels_;
      }
      if (ok) out.push_back(s);
    }
    return out;
  }

  /// Max |X(i,j)| over i, j in `states`.
  static double restricted_max(const MatrixXc& x, const std::vector<Index>& states) {
    double m = 0.0;
    for (Index i : states)
      for (Index j : states) m = std::max(m, std::abs(x(i, j)));
    return m;
  }

 private:
  Index modes_;
  Index levels_;
  Index dim_;
  std::vector<MatrixXc> lower_;
};

/// exp(A) by scaling and squaring of a truncated Taylor series.
inline MatrixXc expm_taylor(const MatrixXc& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const MatrixXc scaled = a / std::pow(2.0, squarings);
  MatrixXc term = MatrixXc::Identity(a.rows(), a.cols());
  MatrixXc sum = term;
  for (int k = 1; k < 30; ++k) {
    term = (term * scaled / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = (sum * sum).eval();
  return sum;
}

}  // namespace hpo::test
