#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <memory>
#include <string>

#include "hpo/errors.hpp"
#include "hpo/lattice.hpp"

namespace hpo {

/// Bosonic modes b_a with [b_a, b_c^dag] = delta_ac. A mode is a grid site
/// together with an internal component; flat index = site * components + c.
class ModeSpace {
 public:
  struct Label {
    Index site;
    Index component;
    bool operator==(const Label&) const = default;
  };

  ModeSpace(Grid grid, Index components = 1) : grid_(std::move(grid)), components_(components) {
    if (components_ < 1) throw PreconditionError("mode space needs at least one component");
    if (grid_.size() * components_ == 0) throw PreconditionError("empty mode space");
  }

  static std::shared_ptr<const ModeSpace> on(const TimeLattice& lattice, Index components = 1) {
    return std::make_shared<const ModeSpace>(lattice.grid(), components);
  }
  static std::shared_ptr<const ModeSpace> on(const SpacetimeLattice& lattice) {
    return std::make_shared<const ModeSpace>(lattice.grid(), 1);
  }

  Index size() const { return grid_.size() * components_; }
  Index sites() const { return grid_.size(); }
  Index components() const { return components_; }
  const Grid& grid() const { return grid_; }
  /// Smearing weight: b_f = sum sqrt(cell_volume) conj(f_a) b_a.
  double cell_volume() const { return grid_.cell_volume(); }

  Index mode(Index site, Index component = 0) const { return site * components_ + component; }
  Label label(Index mode) const { return {mode / components_, mode % components_}; }

  bool operator==(const ModeSpace& other) const {
    return components_ == other.components_ && grid_ == other.grid_;
  }

 private:
  Grid grid_;
  Index components_;
};

using ModeSpacePtr = std::shared_ptr<const ModeSpace>;

inline bool same_modes(const ModeSpacePtr& a, const ModeSpacePtr& b) {
  return a == b || (a && b && *a == *b);
}

/// Normal-ordered operator of degree <= 2 in the modes of a ModeSpace:
///
///   c + sum a_i b_i^dag + sum be_i b_i + sum M_ij b_i^dag b_j
///     + 1/2 sum P_ij b_i^dag b_j^dag + 1/2 sum Q_ij b_i b_j
///
/// with P and Q symmetric. The class is closed under commutators.
template <typename Scalar>
class QuadraticOperatorT {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Real = typename Eigen::NumTraits<Scalar>::Real;

  explicit QuadraticOperatorT(ModeSpacePtr modes)
      : modes_(std::move(modes)),
        create_(Vector::Zero(size())),
        annihilate_(Vector::Zero(size())),
        number_(Matrix::Zero(size(), size())),
        pair_create_(Matrix::Zero(size(), size())),
        pair_annihilate_(Matrix::Zero(size(), size())) {}

  QuadraticOperatorT(ModeSpacePtr modes, Scalar scalar, Vector create, Vector annihilate,
                     Matrix number, Matrix pair_create, Matrix pair_annihilate)
      : modes_(std::move(modes)),
        scalar_(scalar),
        create_(std::move(create)),
        annihilate_(std::move(annihilate)),
        number_(std::move(number)),
        pair_create_(std::move(pair_create)),
        pair_annihilate_(std::move(pair_annihilate)) {
    const Index n = size();
    if (create_.size() != n || annihilate_.size() != n || number_.rows() != n ||
        number_.cols() != n || pair_create_.rows() != n || pair_create_.cols() != n ||
        pair_annihilate_.rows() != n || pair_annihilate_.cols() != n)
      throw DimensionError("quadratic operator components do not match the mode space");
    pair_create_ = (Real(0.5) * (pair_create_ + pair_create_.transpose())).eval();
    pair_annihilate_ = (Real(0.5) * (pair_annihilate_ + pair_annihilate_.transpose())).eval();
  }

  static QuadraticOperatorT zero(ModeSpacePtr modes) { return QuadraticOperatorT(std::move(modes)); }
  static QuadraticOperatorT identity(ModeSpacePtr modes, Scalar value = Scalar(1)) {
    QuadraticOperatorT op(std::move(modes));
    op.scalar_ = value;
    return op;
  }
  static QuadraticOperatorT linear(ModeSpacePtr modes, Vector create, Vector annihilate) {
    const Index n = modes ? modes->size() : 0;
    return QuadraticOperatorT(std::move(modes), Scalar(0), std::move(create),
                              std::move(annihilate), Matrix::Zero(n, n), Matrix::Zero(n, n),
                              Matrix::Zero(n, n));
  }
  static QuadraticOperatorT number_conserving(ModeSpacePtr modes, Matrix number) {
    const Index n = modes ? modes->size() : 0;
    return QuadraticOperatorT(std::move(modes), Scalar(0), Vector::Zero(n), Vector::Zero(n),
                              std::move(number), Matrix::Zero(n, n), Matrix::Zero(n, n));
  }

  const ModeSpacePtr& modes() const { return modes_; }
  Index size() const {
    if (!modes_) throw PreconditionError("quadratic operator without a mode space");
    return modes_->size();
  }

  Scalar scalar() const { return scalar_; }
  const Vector& create() const { return create_; }
  const Vector& annihilate() const { return annihilate_; }
  const Matrix& number() const { return number_; }
  const Matrix& pair_create() const { return pair_create_; }
  const Matrix& pair_annihilate() const { return pair_annihilate_; }

  bool is_number_conserving(Real tol = Real(0)) const {
    return create_.cwiseAbs().maxCoeff() <= tol && annihilate_.cwiseAbs().maxCoeff() <= tol &&
           pair_create_.cwiseAbs().maxCoeff() <= tol &&
           pair_annihilate_.cwiseAbs().maxCoeff() <= tol;
  }

  bool is_hermitian(Real tol = Real(1e-12)) const {
    using std::abs;
    return abs(scalar_ - conj_scalar(scalar_)) <= tol &&
           (create_ - annihilate_.conjugate()).cwiseAbs().maxCoeff() <= tol &&
           (number_ - number_.adjoint()).cwiseAbs().maxCoeff() <= tol &&
           (pair_annihilate_ - pair_create_.conjugate()).cwiseAbs().maxCoeff() <= tol;
  }

  /// Largest absolute component; 0 exactly for the zero operator.
  Real max_abs() const {
    using std::abs;
    Real m = abs(scalar_);
    m = std::max(m, create_.cwiseAbs().maxCoeff());
    m = std::max(m, annihilate_.cwiseAbs().maxCoeff());
    m = std::max(m, number_.cwiseAbs().maxCoeff());
    m = std::max(m, pair_create_.cwiseAbs().maxCoeff());
    m = std::max(m, pair_annihilate_.cwiseAbs().maxCoeff());
    return m;
  }

  QuadraticOperatorT adjoint() const {
    return QuadraticOperatorT(modes_, conj_scalar(scalar_), annihilate_.conjugate(),
                              create_.conjugate(), number_.adjoint(),
                              pair_annihilate_.conjugate(), pair_create_.conjugate());
  }

  QuadraticOperatorT operator+(const QuadraticOperatorT& o) const {
    require_same(o, "sum");
    return QuadraticOperatorT(modes_, scalar_ + o.scalar_, create_ + o.create_,
                              annihilate_ + o.annihilate_, number_ + o.number_,
                              pair_create_ + o.pair_create_,
                              pair_annihilate_ + o.pair_annihilate_);
  }
  QuadraticOperatorT operator-(const QuadraticOperatorT& o) const { return *this + o * Scalar(-1); }
  QuadraticOperatorT operator-() const { return *this * Scalar(-1); }
  QuadraticOperatorT operator*(Scalar s) const {
    return QuadraticOperatorT(modes_, scalar_ * s, create_ * s, annihilate_ * s, number_ * s,
                              pair_create_ * s, pair_annihilate_ * s);
  }
  friend QuadraticOperatorT operator*(Scalar s, const QuadraticOperatorT& a) { return a * s; }

  void require_same(const QuadraticOperatorT& o, const char* what) const {
    if (!same_modes(modes_, o.modes_))
      throw DimensionError(std::string("quadratic ") + what + ": mode-space mismatch");
  }

 private:
  static Scalar conj_scalar(Scalar s) {
    using std::conj;
    return Scalar(conj(s));
  }

  ModeSpacePtr modes_;
  Scalar scalar_{0};
  Vector create_;
  Vector annihilate_;
  Matrix number_;
  Matrix pair_create_;
  Matrix pair_annihilate_;
};

using QuadraticOperator = QuadraticOperatorT<Complex>;

namespace detail {

template <typename M>
bool all_zero(const M& m) {
  return m.size() == 0 || (m.array() == typename M::Scalar(0)).all();
}

}  // namespace detail

/// Exact normal-ordered commutator [A, B].
template <typename Scalar>
QuadraticOperatorT<Scalar> commutator(const QuadraticOperatorT<Scalar>& A,
                                      const QuadraticOperatorT<Scalar>& B) {
  A.require_same(B, "commutator");
  using Op = QuadraticOperatorT<Scalar>;
  using Matrix = typename Op::Matrix;
  using Vector = typename Op::Vector;
  using detail::all_zero;
  const Index n = A.size();

  const auto& aM = A.number();
  const auto& aP = A.pair_create();
  const auto& aQ = A.pair_annihilate();
  const auto& bM = B.number();
  const auto& bP = B.pair_create();
  const auto& bQ = B.pair_annihilate();
  const bool zaM = all_zero(aM), zaP = all_zero(aP), zaQ = all_zero(aQ);
  const bool zbM = all_zero(bM), zbP = all_zero(bP), zbQ = all_zero(bQ);

  // Linear-linear contractions and the double contraction of [bb, b^dag b^dag].
  Scalar scalar = (A.annihilate().transpose() * B.create())(0) -
                  (B.annihilate().transpose() * A.create())(0);
  if (!zaQ && !zbP) scalar += Scalar(0.5) * (aQ.cwiseProduct(bP)).sum();
  if (!zaP && !zbQ) scalar -= Scalar(0.5) * (aP.cwiseProduct(bQ)).sum();

  Vector create = Vector::Zero(n);
  Vector annihilate = Vector::Zero(n);
  if (!zaM) {
    create += aM * B.create();
    annihilate -= aM.transpose() * B.annihilate();
  }
  if (!zaP) create -= aP * B.annihilate();
  if (!zaQ) annihilate += aQ * B.create();
  if (!zbM) {
    create -= bM * A.create();
    annihilate += bM.transpose() * A.annihilate();
  }
  if (!zbP) create += bP * A.annihilate();
  if (!zbQ) annihilate -= bQ * A.create();

  Matrix number = Matrix::Zero(n, n);
  Matrix pair_create = Matrix::Zero(n, n);
  Matrix pair_annihilate = Matrix::Zero(n, n);
  if (!zaM && !zbM) number += aM * bM - bM * aM;
  if (!zbP && !zaQ) number += bP * aQ;
  if (!zaP && !zbQ) number -= aP * bQ;
  if (!zaM && !zbP) pair_create += aM * bP + bP * aM.transpose();
  if (!zbM && !zaP) pair_create -= bM * aP + aP * bM.transpose();
  if (!zaM && !zbQ) pair_annihilate -= aM.transpose() * bQ + bQ * aM;
  if (!zbM && !zaQ) pair_annihilate += bM.transpose() * aQ + aQ * bM;

  return Op(A.modes(), scalar, std::move(create), std::move(annihilate), std::move(number),
            std::move(pair_create), std::move(pair_annihilate));
}

/// Scalar (c-number) part of the normal-ordered commutator; equals the vacuum
/// expectation value of [A, B].
template <typename Scalar>
Scalar central_term(const QuadraticOperatorT<Scalar>& A, const QuadraticOperatorT<Scalar>& B) {
  A.require_same(B, "central_term");
  Scalar s = (A.annihilate().transpose() * B.create())(0) -
             (B.annihilate().transpose() * A.create())(0);
  s += Scalar(0.5) * A.pair_annihilate().cwiseProduct(B.pair_create()).sum();
  s -= Scalar(0.5) * A.pair_create().cwiseProduct(B.pair_annihilate()).sum();
  return s;
}

/// <0| A B |0> for normal-ordered A and B.
template <typename Scalar>
Scalar vacuum_expectation_product(const QuadraticOperatorT<Scalar>& A,
                                  const QuadraticOperatorT<Scalar>& B) {
  A.require_same(B, "vacuum_expectation_product");
  return A.scalar() * B.scalar() + (A.annihilate().transpose() * B.create())(0) +
         Scalar(0.5) * A.pair_annihilate().cwiseProduct(B.pair_create()).sum();
}

/// Componentwise max |A - B|.
template <typename Scalar>
typename QuadraticOperatorT<Scalar>::Real residual(const QuadraticOperatorT<Scalar>& A,
                                                   const QuadraticOperatorT<Scalar>& B) {
  return (A - B).max_abs();
}

/// Unitary on the one-particle space; its second quantization maps
/// b -> U b under conjugation.
class OneParticleUnitary {
 public:
  OneParticleUnitary(ModeSpacePtr modes, MatrixXc matrix, double tol = 1e-12)
      : modes_(std::move(modes)), matrix_(std::move(matrix)) {
    if (!modes_) throw PreconditionError("unitary without a mode space");
    if (matrix_.rows() != modes_->size() || matrix_.cols() != modes_->size())
      throw DimensionError("unitary size does not match the mode space");
    const double defect =
        (matrix_.adjoint() * matrix_ - MatrixXc::Identity(matrix_.rows(), matrix_.cols()))
            .cwiseAbs()
            .maxCoeff();
    if (defect > tol) throw PreconditionError("matrix is not unitary");
  }

  /// U = diag(exp(-i phase_a)).
  static OneParticleUnitary phases(ModeSpacePtr modes, const Eigen::VectorXd& phase) {
    VectorXc d(phase.size());
    for (Index a = 0; a < phase.size(); ++a) d[a] = std::polar(1.0, -phase[a]);
    return OneParticleUnitary(std::move(modes), d.asDiagonal().toDenseMatrix());
  }

  const ModeSpacePtr& modes() const { return modes_; }
  const MatrixXc& matrix() const { return matrix_; }

 private:
  ModeSpacePtr modes_;
  MatrixXc matrix_;
};

/// Gamma(U) A Gamma(U)^dag with b -> U b, b^dag -> conj(U) b^dag. A *-automorphism.
template <typename Scalar>
QuadraticOperatorT<Scalar> gaussian_conjugate(const QuadraticOperatorT<Scalar>& A,
                                              const OneParticleUnitary& U) {
  if (!same_modes(A.modes(), U.modes()))
    throw DimensionError("gaussian_conjugate: mode-space mismatch");
  using Op = QuadraticOperatorT<Scalar>;
  const typename Op::Matrix u = U.matrix().template cast<Scalar>();
  const typename Op::Matrix ud = u.adjoint();
  const typename Op::Matrix ut = u.transpose();
  return Op(A.modes(), A.scalar(), ud * A.create(), ut * A.annihilate(), ud * A.number() * u,
            ud * A.pair_create() * u.conjugate(), ut * A.pair_annihilate() * u);
}

}  // namespace hpo
