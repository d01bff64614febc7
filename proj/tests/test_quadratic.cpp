#include <doctest.h>

#include <numbers>

#include "hpo/models.hpp"
#include "hpo/quadratic.hpp"
#include "support.hpp"

using namespace hpo;
using hpo::test::max_abs;

namespace {

const Complex I(0.0, 1.0);
const Units kUnits{0.7, 1.3, 1.9};

TestFunction pointwise(const TestFunction& a, const TestFunction& b) { return a.pointwise(b); }

TestFunction map_real(const TestFunction& f, double (*fn)(double), double scale) {
  VectorXc v(f.size());
  for (Index i = 0; i < f.size(); ++i) v[i] = fn(scale * f[i].real());
  return TestFunction(f.grid(), std::move(v));
}

OneParticleUnitary random_unitary(std::mt19937_64& rng, const ModeSpacePtr& modes) {
  Eigen::HouseholderQR<MatrixXc> qr(test::random_matrix(rng, modes->size()));
  return OneParticleUnitary(modes, qr.householderQ() * MatrixXc::Identity(modes->size(), modes->size()));
}

}  // namespace

TEST_CASE("smeared positions and momenta satisfy the canonical history algebra") {
  std::mt19937_64 rng(101);
  const TimeLattice lat(16, 0.3);
  const auto modes = ModeSpace::on(lat);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = test::random_function(rng, lat);
    const auto g = test::random_function(rng, lat);
    const auto xf = smear_position(modes, f, kUnits), xg = smear_position(modes, g, kUnits);
    const auto pf = smear_momentum(modes, f, kUnits), pg = smear_momentum(modes, g, kUnits);
    CHECK(commutator(xf, xg).max_abs() < 1e-14);
    CHECK(commutator(pf, pg).max_abs() < 1e-14);
    const auto expected = QuadraticOperator::identity(modes, I * kUnits.hbar * inner_product(f, g));
    CHECK(residual(commutator(xf, pg), expected) < 1e-13);
    CHECK(std::abs(central_term(xf, pg) - I * kUnits.hbar * inner_product(f, g)) < 1e-13);
    CHECK(xf.is_hermitian());
    CHECK(pf.is_hermitian());
    CHECK(residual(pf.adjoint(), pf) == 0.0);
  }
  CHECK(smear_position(modes, TestFunction::zero(lat.grid()), kUnits).max_abs() == 0.0);
}

TEST_CASE("annihilators rebuilt from x and p obey [b_f, b_g^dag] = <f, g>") {
  std::mt19937_64 rng(102);
  const TimeLattice lat(12, 0.2);
  const auto modes = ModeSpace::on(lat);
  const double a = std::sqrt(kUnits.mass * kUnits.omega / (2.0 * kUnits.hbar));
  const double c = 1.0 / std::sqrt(2.0 * kUnits.mass * kUnits.omega * kUnits.hbar);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = test::random_function(rng, lat);
    const auto g = test::random_function(rng, lat);
    auto rebuild = [&](const TestFunction& h) {
      return smear_position(modes, h, kUnits) * Complex(a) +
             smear_momentum(modes, h, kUnits) * (I * c);
    };
    const auto bf = rebuild(f), bg = rebuild(g);
    CHECK(residual(bf, annihilator(modes, f)) < 1e-14);
    CHECK(residual(commutator(bf, bg.adjoint()),
                   QuadraticOperator::identity(modes, inner_product(f, g))) < 1e-13);
    CHECK(commutator(bf, bg).max_abs() < 1e-14);
  }
  // complex test functions: antilinear annihilator
  const auto f = test::random_function(rng, lat, false);
  const auto g = test::random_function(rng, lat, false);
  CHECK(std::abs(central_term(annihilator(modes, f), creator(modes, g)) - inner_product(f, g)) <
        1e-13);
  CHECK(residual(annihilator(modes, f * Complex(0, 2)), annihilator(modes, f) * Complex(0, -2)) <
        1e-14);
}

TEST_CASE("smearing rejects functions from another lattice") {
  const auto modes = ModeSpace::on(TimeLattice(8, 0.5));
  const auto other = TestFunction::constant(TimeLattice(8, 0.25).grid(), 1.0);
  CHECK_THROWS_AS(smear_position(modes, other, kUnits), DimensionError);
  CHECK_THROWS_AS(smear_momentum(modes, other, kUnits), DimensionError);
}

// ---------------------------------------------------------------------------

TEST_CASE("commutator matches the dense ladder-operator oracle") {
  std::mt19937_64 rng(103);
  const auto modes = std::make_shared<const ModeSpace>(Grid({3}, {0.5}), 1);
  const test::DenseLadder ladder(3, 7);
  const auto low = ladder.low_states(2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto A = test::random_quadratic(rng, modes);
    const auto B = test::random_quadratic(rng, modes);
    const MatrixXc a = ladder.represent(A), b = ladder.represent(B);
    const MatrixXc oracle = a * b - b * a;
    const MatrixXc engine = ladder.represent(commutator(A, B));
    CHECK(test::DenseLadder::restricted_max(oracle - engine, low) < 1e-11);
    // central term is the vacuum expectation value
    CHECK(std::abs(central_term(A, B) - oracle(0, 0)) < 1e-12);
    CHECK(std::abs(vacuum_expectation_product(A, B) - (a * b)(0, 0)) < 1e-12);
  }
}

TEST_CASE("commutator is bilinear, antisymmetric and satisfies Jacobi") {
  std::mt19937_64 rng(104);
  const auto modes = ModeSpace::on(TimeLattice(6, 0.5), 2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto A = test::random_hermitian(rng, modes);
    const auto B = test::random_hermitian(rng, modes);
    const auto C = test::random_hermitian(rng, modes);
    CHECK(commutator(A, A).max_abs() < 1e-14);
    CHECK(std::abs(central_term(A, A)) < 1e-14);
    CHECK(residual(commutator(A, B), -commutator(B, A)) < 1e-13);
    const Complex s(0.3, -1.2);
    CHECK(residual(commutator(A * s + B, C), commutator(A, C) * s + commutator(B, C)) < 1e-12);
    const auto jacobi = commutator(commutator(A, B), C) + commutator(commutator(B, C), A) +
                        commutator(commutator(C, A), B);
    CHECK(jacobi.max_abs() < 1e-12);
    // [A, B] of Hermitian operators is anti-Hermitian
    CHECK((commutator(A, B) * I).is_hermitian(1e-12));
  }
}

TEST_CASE("commutator rejects operators on different mode spaces") {
  const auto a = QuadraticOperator::identity(ModeSpace::on(TimeLattice(4, 1.0)));
  const auto b = QuadraticOperator::identity(ModeSpace::on(TimeLattice(5, 1.0)));
  CHECK_THROWS_AS(commutator(a, b), DimensionError);
  CHECK_THROWS_AS(central_term(a, b), DimensionError);
  CHECK_THROWS_AS(QuadraticOperator(ModeSpace::on(TimeLattice(4, 1.0)), 0.0, VectorXc::Zero(3),
                                    VectorXc::Zero(4), MatrixXc::Zero(4, 4), MatrixXc::Zero(4, 4),
                                    MatrixXc::Zero(4, 4)),
                  DimensionError);
}

TEST_CASE("pair blocks are symmetrized on construction") {
  std::mt19937_64 rng(105);
  const auto modes = ModeSpace::on(TimeLattice(4, 1.0));
  const auto A = test::random_quadratic(rng, modes);
  CHECK(max_abs(A.pair_create() - A.pair_create().transpose()) == 0.0);
  CHECK(max_abs(A.pair_annihilate() - A.pair_annihilate().transpose()) == 0.0);
}

// ---------------------------------------------------------------------------

TEST_CASE("H(chi) generates the oscillator motion") {
  std::mt19937_64 rng(106);
  const TimeLattice lat(16, 0.25);
  const auto modes = ModeSpace::on(lat);
  for (int trial = 0; trial < 10; ++trial) {
    const auto chi = test::random_function(rng, lat);
    const auto chi2 = test::random_function(rng, lat);
    const auto f = test::random_function(rng, lat);
    const auto H = build_H(modes, chi, kUnits);
    CHECK(H.is_hermitian());
    CHECK(H.is_number_conserving());
    CHECK(commutator(H, build_H(modes, chi2, kUnits)).max_abs() == 0.0);
    const auto lhs = commutator(H, smear_position(modes, f, kUnits));
    const auto rhs = smear_momentum(modes, pointwise(chi, f), kUnits) *
                     (-I * kUnits.hbar / kUnits.mass);
    CHECK(residual(lhs, rhs) < 1e-13);
    const auto pcomm = commutator(H, smear_momentum(modes, f, kUnits));
    const auto prhs = smear_position(modes, pointwise(chi, f), kUnits) *
                      (I * kUnits.hbar * kUnits.mass * kUnits.omega * kUnits.omega);
    CHECK(residual(pcomm, prhs) < 1e-13);
    const auto bcomm = commutator(H, annihilator(modes, f));
    CHECK(residual(bcomm, annihilator(modes, pointwise(chi, f)) *
                              Complex(-kUnits.hbar * kUnits.omega)) < 1e-13);
    CHECK(H.scalar() == Complex(0.0));  // <0|H|0> = 0
  }
  CHECK(build_H(modes, TestFunction::zero(lat.grid()), kUnits).max_abs() == 0.0);
  CHECK_THROWS_AS(build_H(modes, TestFunction::constant(lat.grid(), Complex(0, 1)), kUnits),
                  PreconditionError);
}

TEST_CASE("center-of-time operator is diagonal in the lattice times") {
  const TimeLattice lat(8, 0.5);
  const auto modes = ModeSpace::on(lat);
  const auto T = build_center_of_time(modes);
  CHECK(T.is_hermitian());
  CHECK(T.is_number_conserving());
  for (Index i = 0; i < 8; ++i) CHECK(T.number()(i, i) == Complex(0.5 * static_cast<double>(i)));
}

// ---------------------------------------------------------------------------

TEST_CASE("gaussian_conjugate with the identity leaves operators unchanged") {
  std::mt19937_64 rng(107);
  const auto modes = ModeSpace::on(TimeLattice(6, 0.5));
  const auto A = test::random_quadratic(rng, modes);
  const OneParticleUnitary id(modes, MatrixXc::Identity(6, 6));
  CHECK(residual(gaussian_conjugate(A, id), A) == 0.0);
}

TEST_CASE("gaussian_conjugate is a *-automorphism") {
  std::mt19937_64 rng(108);
  const auto modes = ModeSpace::on(TimeLattice(5, 0.5), 2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto U = random_unitary(rng, modes);
    const auto A = test::random_quadratic(rng, modes);
    const auto B = test::random_quadratic(rng, modes);
    CHECK(residual(gaussian_conjugate(commutator(A, B), U),
                   commutator(gaussian_conjugate(A, U), gaussian_conjugate(B, U))) < 1e-12);
    CHECK(residual(gaussian_conjugate(A.adjoint(), U), gaussian_conjugate(A, U).adjoint()) <
          1e-13);
  }
}

TEST_CASE("gaussian_conjugate matches exp(iA) B exp(-iA) on the dense oracle") {
  std::mt19937_64 rng(109);
  const auto modes = std::make_shared<const ModeSpace>(Grid({2}, {1.0}), 1);
  const test::DenseLadder ladder(2, 14);
  const auto low = ladder.low_states(3);
  const MatrixXc h = test::random_matrix(rng, 2, 0.4);
  const MatrixXc herm = 0.5 * (h + h.adjoint());
  const auto H = QuadraticOperator::number_conserving(modes, herm);
  // exp(iH) b exp(-iH) = exp(-i herm) b for the one-particle unitary below.
  const OneParticleUnitary U(modes, test::expm_taylor(-I * herm));
  const auto B = test::random_quadratic(rng, modes);
  const MatrixXc big = test::expm_taylor(I * ladder.represent(H));
  const MatrixXc oracle = big * ladder.represent(B) * big.adjoint();
  const MatrixXc engine = ladder.represent(gaussian_conjugate(B, U));
  CHECK(test::DenseLadder::restricted_max(oracle - engine, low) < 1e-10);
}

TEST_CASE("oscillator conjugation reproduces the cos/sin rotation") {
  std::mt19937_64 rng(110);
  const TimeLattice lat(16, 0.25);
  const auto modes = ModeSpace::on(lat);
  for (int trial = 0; trial < 10; ++trial) {
    const auto chi = test::random_function(rng, lat);
    const auto f = test::random_function(rng, lat);
    const auto U = oscillator_evolution(modes, chi, kUnits);
    const auto cosf = pointwise(map_real(chi, [](double x) { return std::cos(x); }, kUnits.omega), f);
    const auto sinf = pointwise(map_real(chi, [](double x) { return std::sin(x); }, kUnits.omega), f);
    const double mw = kUnits.mass * kUnits.omega;
    const auto x_expected =
        smear_position(modes, cosf, kUnits) + smear_momentum(modes, sinf, kUnits) * Complex(1.0 / mw);
    CHECK(residual(gaussian_conjugate(smear_position(modes, f, kUnits), U), x_expected) < 1e-13);
    const auto p_expected =
        smear_position(modes, sinf, kUnits) * Complex(-mw) + smear_momentum(modes, cosf, kUnits);
    CHECK(residual(gaussian_conjugate(smear_momentum(modes, f, kUnits), U), p_expected) < 1e-13);
  }
  // quarter period: x_f -> p_f / (m omega)
  const auto quarter = TestFunction::constant(lat.grid(), std::numbers::pi / (2.0 * kUnits.omega));
  const auto f = test::random_function(rng, lat);
  CHECK(residual(gaussian_conjugate(smear_position(modes, f, kUnits),
                                    oscillator_evolution(modes, quarter, kUnits)),
                 smear_momentum(modes, f, kUnits) * Complex(1.0 / (kUnits.mass * kUnits.omega))) <
        1e-13);
}

TEST_CASE("non-unitary matrices are rejected") {
  const auto modes = ModeSpace::on(TimeLattice(3, 1.0));
  CHECK_THROWS_AS(OneParticleUnitary(modes, 2.0 * MatrixXc::Identity(3, 3)), PreconditionError);
  CHECK_THROWS_AS(OneParticleUnitary(modes, MatrixXc::Identity(2, 2)), DimensionError);
}

// ---------------------------------------------------------------------------

TEST_CASE("time-averaged Heisenberg operators obey the covariant commutator") {
  std::mt19937_64 rng(111);
  const TimeLattice lat(16, 0.25);
  const auto modes = ModeSpace::on(lat);
  for (int trial = 0; trial < 10; ++trial) {
    const auto k1 = test::random_function(rng, lat), k2 = test::random_function(rng, lat);
    const auto f = test::random_function(rng, lat), g = test::random_function(rng, lat);
    const auto x1 = gaussian_conjugate(smear_position(modes, f, kUnits),
                                       oscillator_evolution(modes, k1, kUnits));
    const auto x2 = gaussian_conjugate(smear_position(modes, g, kUnits),
                                       oscillator_evolution(modes, k2, kUnits));
    Complex expected = 0.0;
    for (Index i = 0; i < lat.n_points(); ++i)
      expected += f[i] * g[i] * lat.dt() *
                  std::sin(kUnits.omega * (k2[i].real() - k1[i].real()));
    expected *= I * kUnits.hbar / (kUnits.mass * kUnits.omega);
    CHECK(residual(commutator(x1, x2), QuadraticOperator::identity(modes, expected)) < 1e-13);
  }
}

TEST_CASE("functional derivative of x_kappa at kappa = 0 is p / m") {
  std::mt19937_64 rng(112);
  const TimeLattice lat(16, 0.25);
  const auto modes = ModeSpace::on(lat);
  const auto f = test::random_function(rng, lat);
  const Index s = 5;
  VectorXc bump = VectorXc::Zero(16);
  bump[s] = 1.0;
  const TestFunction e_s(lat, bump);
  const auto x = smear_position(modes, f, kUnits);
  const auto target = smear_momentum(modes, e_s * f[s], kUnits) * Complex(1.0 / kUnits.mass);
  auto error = [&](double h) {
    const auto plus = gaussian_conjugate(x, oscillator_evolution(modes, e_s * h, kUnits));
    const auto minus = gaussian_conjugate(x, oscillator_evolution(modes, e_s * -h, kUnits));
    return residual((plus - minus) * Complex(1.0 / (2.0 * h)), target);
  };
  const double e1 = error(1e-3), e2 = error(5e-4);
  CHECK(e1 < 1e-6);
  CHECK(e1 / e2 > 3.9);
  CHECK(e1 / e2 < 4.1);
}

// ---------------------------------------------------------------------------

TEST_CASE("point-split angular momentum has no central extension") {
  std::mt19937_64 rng(113);
  const TimeLattice lat(12, 0.25);
  const auto modes = ModeSpace::on(lat, 3);
  const auto chi = test::random_function(rng, lat);
  const auto zero = TestFunction::zero(lat.grid());
  for (Index eps : {0, 1, 2, 3}) {
    const auto L1 = build_angular_momentum(modes, 1, chi, eps, kUnits);
    const auto L2 = build_angular_momentum(modes, 2, zero, eps, kUnits);
    CHECK(L1.is_number_conserving());
    CHECK(central_term(L1, L2) == Complex(0.0));
    CHECK(commutator(L1, L2).scalar() == Complex(0.0));
    CHECK(commutator(L1, L1).max_abs() < 1e-14);
  }
  for (int axis = 1; axis <= 3; ++axis)
    CHECK(build_angular_momentum(modes, axis, zero, 0, kUnits).is_hermitian());
}

TEST_CASE("coincident-point angular momenta close on the rotation algebra") {
  const TimeLattice lat(8, 0.5);
  const auto modes = ModeSpace::on(lat, 3);
  const auto zero = TestFunction::zero(lat.grid());
  const auto L1 = build_angular_momentum(modes, 1, zero, 0, kUnits);
  const auto L2 = build_angular_momentum(modes, 2, zero, 0, kUnits);
  const auto L3 = build_angular_momentum(modes, 3, zero, 0, kUnits);
  CHECK(residual(commutator(L1, L2), L3 * (I * kUnits.hbar)) < 1e-13);
  CHECK(residual(commutator(L2, L3), L1 * (I * kUnits.hbar)) < 1e-13);
  CHECK(residual(commutator(L3, L1), L2 * (I * kUnits.hbar)) < 1e-13);
}

TEST_CASE("coincident-point L equals x cross p summed over the lattice") {
  // L^3 = sum_t (x^1_t p^2_t - x^2_t p^1_t) with x_t = x_{delta_t}/dt.
  const TimeLattice lat(2, 0.5);
  const auto modes = ModeSpace::on(lat, 3);
  const test::DenseLadder ladder(modes->size(), 2);
  const auto L3 = build_angular_momentum(modes, 3, TestFunction::zero(lat.grid()), 0, kUnits);
  MatrixXc cross = MatrixXc::Zero(ladder.dimension(), ladder.dimension());
  for (Index t = 0; t < 2; ++t) {
    VectorXc d = VectorXc::Zero(2);
    d[t] = 1.0 / lat.dt();
    const TestFunction delta(lat, d);
    auto xr = [&](Index c) { return ladder.represent(smear_position(modes, delta, kUnits, c)); };
    auto pr = [&](Index c) { return ladder.represent(smear_momentum(modes, delta, kUnits, c)); };
    cross += (xr(0) * pr(1) - xr(1) * pr(0)) * lat.dt();
  }
  // x p - p x on a single mode is i hbar; the x^1 p^2 products involve distinct modes only.
  const auto low = ladder.low_states(0);
  CHECK(test::DenseLadder::restricted_max(cross - ladder.represent(L3), low) < 1e-12);
  // Also compare on one-particle states, where truncation is harmless.
  std::vector<Index> one;
  for (Index m = 0; m < modes->size(); ++m) one.push_back(Index(1) << (modes->size() - 1 - m));
  CHECK(test::DenseLadder::restricted_max(cross - ladder.represent(L3), one) < 1e-12);
}

TEST_CASE("angular momentum preconditions") {
  const TimeLattice lat(8, 0.5);
  const auto scalar_modes = ModeSpace::on(lat);
  const auto zero = TestFunction::zero(lat.grid());
  CHECK_THROWS_AS(build_angular_momentum(scalar_modes, 1, zero, 1, kUnits), PreconditionError);
  const auto modes = ModeSpace::on(lat, 3);
  CHECK_THROWS_AS(build_angular_momentum(modes, 4, zero, 1, kUnits), PreconditionError);
  CHECK_THROWS_AS(build_angular_momentum(modes, 1, zero, 8, kUnits), PreconditionError);
}

// ---------------------------------------------------------------------------

TEST_CASE("velocity-extended model") {
  std::mt19937_64 rng(114);
  const TimeLattice lat(16, 0.25);
  const auto modes = ModeSpace::on(lat);
  SUBCASE("lambda = 0 reduces to the oscillator") {
    const VelocityExtendedModel model(modes, 0.0, kUnits);
    const auto chi = test::random_function(rng, lat);
    const auto f = test::random_function(rng, lat);
    CHECK(residual(model.hamiltonian(chi), build_H(modes, chi, kUnits)) < 1e-12);
    CHECK(residual(model.position(f), smear_position(modes, f, kUnits)) < 1e-12);
    CHECK(residual(model.momentum(f), smear_momentum(modes, f, kUnits)) < 1e-12);
  }
  for (double lambda : {0.5, 1.0, 2.0}) {
    const VelocityExtendedModel model(modes, lambda, kUnits);
    const auto f = test::random_function(rng, lat);
    const auto g = test::random_function(rng, lat);
    // canonical algebra survives the change of basis
    CHECK(std::abs(central_term(model.position(f), model.momentum(g)) -
                   I * kUnits.hbar * inner_product(f, g)) < 1e-12);
    CHECK(commutator(model.position(f), model.position(g)).max_abs() < 1e-12);
    CHECK(commutator(model.position(f), model.velocity(g)).max_abs() < 1e-12);
    // constant chi: conjugation by exp(iH/hbar) acts as exp(-i chi Omega) on c-modes
    const double c = 0.8;
    const auto H = model.hamiltonian(TestFunction::constant(lat.grid(), c));
    CHECK(H.is_hermitian(1e-12));
    const auto U = model.evolution(c);
    const auto cf = model.annihilator(f);
    const auto rotated = gaussian_conjugate(cf, U);
    const auto expected_f = spectral_apply(
        model.frequency().map([c](Complex w) { return std::exp(Complex(0.0, -c) * w); }, "u",
                              false, false),
        f);
    // b_f -> b_{U^dag f}; with f real and U symmetric, U^dag f = conj(U f)
    CHECK(residual(rotated, model.annihilator(expected_f.conjugate())) < 1e-12);
    // and conjugation is generated by H: compare with the series exp(ad_{iH/hbar})
    const double c_small = 0.1;
    const auto H_small = model.hamiltonian(TestFunction::constant(lat.grid(), c_small));
    auto term = cf;
    auto series = cf;
    for (int k = 1; k < 60; ++k) {
      term = commutator(H_small, term) * (I / (kUnits.hbar * static_cast<double>(k)));
      series = series + term;
    }
    CHECK(residual(gaussian_conjugate(cf, model.evolution(c_small)), series) < 1e-11);
  }
  SUBCASE("open boundary is rejected") {
    const auto open = ModeSpace::on(TimeLattice(8, 0.5, Boundary::open));
    CHECK_THROWS_AS(VelocityExtendedModel(open, 1.0, kUnits), PreconditionError);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("free-field history operators") {
  std::mt19937_64 rng(115);
  const SpacetimeLattice lat({4, 2, 2, 2}, {0.5, 0.6, 0.7, 0.8});
  const FreeFieldModel model(lat, 0.9, kUnits);
  const auto& modes = model.modes();
  auto random_grid_function = [&](const Grid& g) {
    return TestFunction(g, test::random_real(rng, g.size()).cast<Complex>());
  };
  const TimeLattice axis = lat.time_axis();
  const auto chi = test::random_function(rng, axis);
  const auto chi2 = test::random_function(rng, axis);
  const auto f = random_grid_function(lat.grid());
  const auto g = random_grid_function(lat.grid());

  CHECK(std::abs(central_term(model.field(f), model.conjugate_momentum(g)) -
                 I * kUnits.hbar * inner_product(f, g)) < 1e-12);
  CHECK(commutator(model.field(f), model.field(g)).max_abs() < 1e-12);

  const auto H = model.hamiltonian(chi);
  CHECK(H.is_hermitian(1e-12));
  CHECK(commutator(H, model.hamiltonian(chi2)).max_abs() < 1e-12);
  const auto lhs = commutator(H, model.field(f));
  const auto rhs = model.conjugate_momentum(model.lift(chi).pointwise(f)) * (-I * kUnits.hbar);
  CHECK(residual(lhs, rhs) < 1e-12);
  CHECK(commutator(model.hamiltonian(TestFunction::zero(axis.grid())), model.field(f)).max_abs() ==
        0.0);

  // one-particle conjugation against the commutator series exp(ad_{iH/hbar})
  const auto b = model.annihilator(f);
  auto term = b;
  auto series = b;
  for (int k = 1; k < 60; ++k) {
    term = commutator(H, term) * (I / (kUnits.hbar * static_cast<double>(k)));
    series = series + term;
  }
  CHECK(residual(gaussian_conjugate(b, model.evolution(chi)), series) < 1e-10);
}

TEST_CASE("free-field evolution equals the dense matrix exponential") {
  const SpacetimeLattice lat({2, 2, 2, 2}, {0.5, 0.5, 0.5, 0.5});
  const double mass = 1.2;
  const FreeFieldModel model(lat, mass, kUnits);
  const TimeLattice axis = lat.time_axis();
  const auto chi = TestFunction::sample(axis, [](double t) { return 0.4 + 0.9 * t; });

  // Independent dense K: spatial -Laplacian from direct DFT matrices, plus m^2.
  const Index n = 2;
  const MatrixXc d2 = test::circulant_from_symbol(n, [](Index q) {
    const double k = test::wrapped_frequency(2, 0.5, q);
    return Complex(k * k);
  });
  const MatrixXc id = MatrixXc::Identity(n, n);
  auto kron = [](const MatrixXc& a, const MatrixXc& b) {
    MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
  };
  const MatrixXc spatial = kron(kron(d2, id), id) + kron(kron(id, d2), id) + kron(kron(id, id), d2) +
                           mass * mass * MatrixXc::Identity(8, 8);
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(spatial);
  const MatrixXc root = solver.eigenvectors() *
                        solver.eigenvalues().cwiseSqrt().cast<Complex>().asDiagonal() *
                        solver.eigenvectors().adjoint();
  const MatrixXc full_root = kron(MatrixXc::Identity(2, 2), root);
  VectorXc chi_x(16);
  for (Index a = 0; a < 16; ++a) chi_x[a] = chi[a / 8];
  const MatrixXc oracle = test::expm_taylor(-I * (chi_x.asDiagonal() * full_root));
  CHECK(max_abs(model.evolution(chi).matrix() - oracle) < 1e-10);
  CHECK(max_abs(model.Kn().to_matrix() - kron(MatrixXc::Identity(2, 2), spatial)) < 1e-12);
}

TEST_CASE("complex<long double> instantiation of the engine") {
  using Op = QuadraticOperatorT<std::complex<long double>>;
  const auto modes = ModeSpace::on(TimeLattice(3, 1.0));
  Op::Vector v(3);
  v << 1.0L, 2.0L, 3.0L;
  const Op x = Op::linear(modes, v, v);
  const Op p = Op::linear(modes, v * std::complex<long double>(0, 1), v * std::complex<long double>(0, -1));
  const auto c = commutator(x, p);
  CHECK(std::abs(c.scalar() - std::complex<long double>(0, 28)) < 1e-15L);
}
