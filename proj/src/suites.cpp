#include "hpo/suites.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "hpo/fock.hpp"
#include "hpo/histories.hpp"
#include "hpo/quadratic.hpp"

namespace hpo {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

// --- catalogue ---------------------------------------------------------------

const std::vector<CheckInfo>& catalogue() {
  static const std::vector<CheckInfo> table{
      {"cha", "cha.xx", "smeared CHA [x_f,x_g]=0", "positions commute for random real f, g"},
      {"cha", "cha.pp", "smeared CHA [p_f,p_g]=0", "momenta commute for random real f, g"},
      {"cha", "cha.xp", "smeared CHA [x_f,p_g]=iħ∫fg", "canonical pairing is a multiple of the identity"},
      {"cha", "cha.bb", "mode algebra [b_f,b_g†]=⟨f,g⟩", "annihilators rebuilt from x and p"},
      {"cha", "cha.hermitian", "x_f, p_f self-adjoint for real f", "adjoint residual of x_f and p_f"},

      {"hamiltonian", "hamiltonian.hx", "[H(χ),x_f]=−(iħ/m)p_{χf}", "energy generates position flow"},
      {"hamiltonian", "hamiltonian.hp", "[H(χ),p_f]=iħmω²x_{χf}", "energy generates momentum flow"},
      {"hamiltonian", "hamiltonian.hh", "[H(χ₁),H(χ₂)]=0", "time-averaged energies commute"},
      {"hamiltonian", "hamiltonian.hb", "[H(χ),b_f]=−ħω b_{χf}", "annihilators are lowered by H(χ)"},
      {"hamiltonian", "hamiltonian.vacuum", "H(χ)|0⟩=0", "renormalized energy annihilates the vacuum"},
      {"hamiltonian", "hamiltonian.rotation_x", "e^{iH(χ)/ħ}x_t e^{−iH(χ)/ħ}=cos(ωχ)x_t+sin(ωχ)p_t/mω",
       "Gaussian conjugation of positions"},
      {"hamiltonian", "hamiltonian.rotation_p", "e^{iH(χ)/ħ}p_t e^{−iH(χ)/ħ}=−mω sin(ωχ)x_t+cos(ωχ)p_t",
       "Gaussian conjugation of momenta"},
      {"hamiltonian", "hamiltonian.automorphism", "e^{iH(χ)/ħ}(·)e^{−iH(χ)/ħ} is an automorphism of the CHA",
       "conjugation preserves brackets of random quadratics"},
      {"hamiltonian", "hamiltonian.white_noise", "⟨0|x_f x_g|0⟩=(ħ/2mω)⟨f,g⟩",
       "vacuum position correlation evaluated on Fock vectors"},

      {"nparticle", "nparticle.h1_blocks", "∫ds H_s has spectrum Nħω", "every N-block eigenvalue of H(1)"},
      {"nparticle", "nparticle.h_chi", "H(χ)|t₁…tₙ⟩=ħωΣχ(tᵢ)|t₁…tₙ⟩",
       "eigen-residual on every occupation state"},
      {"nparticle", "nparticle.repeated", "H(χ)|t,t⟩=2ħωχ(t)|t,t⟩", "repeated-time states"},
      {"nparticle", "nparticle.center_of_time", "center-of-time eigenvalue t₁+…+tₙ",
       "eigen-residual on every occupation state"},

      {"heisenberg", "heisenberg.covariant", "[x_{κ₁,f},x_{κ₂,g}]=(iħ/mω)Σ f g sin ω(κ₂−κ₁) dt",
       "covariant commutator of time-averaged Heisenberg positions"},
      {"heisenberg", "heisenberg.derivative", "m δx_{κ}/δκ(s)|₀ = p_s",
       "central finite difference against the analytic O(h²) bound"},
      {"heisenberg", "heisenberg.derivative_order", "m δx_{κ}/δκ(s)|₀ = p_s (second order)",
       "error reduction when the step is halved"},
      {"heisenberg", "heisenberg.equation_of_motion", "δ²x_κ/δκ(s)² + ω²x = 0",
       "second functional derivative at κ=0"},

      {"coherent", "coherent.overlap_law", "⟨exp φ|exp ψ⟩=exp⟨φ,ψ⟩",
       "truncation error over analytic tail plus rounding allowance (must be ≤ 1)"},
      {"coherent", "coherent.partial_sum", "⟨exp φ|exp ψ⟩ truncated = Σ_{n≤N}⟨φ,ψ⟩ⁿ/n!",
       "truncated overlap equals the partial exponential series"},
      {"coherent", "coherent.tail_bound", "Σ_{n>N} xⁿ/n! = eˣ − Σ_{n≤N} xⁿ/n!", "tail formula itself"},
      {"coherent", "coherent.eigenvector", "b_f|exp φ⟩=⟨f,φ⟩|exp φ⟩", "annihilator eigen-relation below the cutoff"},

      {"angular", "angular.central", "no central extension in [L¹_{χ,ε},L²_{0,ε}]",
       "max |central term| over the refinement schedule"},
      {"angular", "angular.antisymmetry", "[Lⁱ,Lⁱ]=0", "self-commutators vanish"},
      {"angular", "angular.coincident", "[L¹,L²]=iħL³ at coincident points",
       "exact rotation algebra at ε=0"},
      {"angular", "angular.hermitian", "L^i_{0,0} self-adjoint", "adjoint residual of unsplit generators"},
      {"angular", "angular.dt_refinement", "[L¹_{χ,ε},L²_{0,ε}] → iħL³ as ε=dt→0",
       "largest ratio of successive defects under dt halving (must be < 1)"},
      {"angular", "angular.eps_refinement", "[L¹_{χ,ε},L²_{0,ε}] → iħL³ as ε→0 at fixed dt",
       "largest ratio of successive defects as ε shrinks (must be < 1)"},

      {"velocity", "velocity.xxdot", "[x_f,ẋ_g]=0 with ẋ_g=−x_{ġ}", "positions commute with velocities"},
      {"velocity", "velocity.cha", "velocity-extended CHA [x_f,p_g]=iħ⟨f,g⟩", "canonical pairing in c-modes"},
      {"velocity", "velocity.green", "⟨0|x_t x_s|0⟩=(ħ/2m)G(t,s), G kernel of (ω²−λD²)^{-1/2}",
       "vacuum two-point function on Fock vectors vs greens_kernel"},
      {"velocity", "velocity.reduction", "λ=0 velocity-extended energy equals H(χ)",
       "componentwise residual of H, x and p at λ=0"},
      {"velocity", "velocity.flow", "e^{iH/ħ}c_f e^{−iH/ħ}=c_{exp[−i√(ω²−λD²)]f}",
       "constant-χ conjugation vs commutator series"},

      {"qft", "qft.cha", "[φ_f,π_g]=iħ⟨f,g⟩", "field algebra on the 4D history lattice"},
      {"qft", "qft.h_phi", "[H_n(χ),φ_f]=−iħπ_{χ(n·X)f}", "internal Hamiltonian generates the field flow"},
      {"qft", "qft.hh", "[H_n(χ₁),H_n(χ₂)]=0", "χ(n·X) commutes with K_n"},
      {"qft", "qft.kn_floor", "K_n ≥ m²", "smallest eigenvalue of K_n minus m²"},
      {"qft", "qft.expm", "e^{iH_n(χ)/ħ}b(X)e^{−iH_n(χ)/ħ}=e^{−iχ(n·X)√K_n}b(X)",
       "one-particle unitary vs dense matrix exponential on the oracle grid"},
      {"qft", "qft.series", "e^{iH_n(χ)/ħ}b(f)e^{−iH_n(χ)/ħ} by commutator series",
       "Gaussian conjugation vs exp(ad) series on the oracle grid"},

      {"histories", "histories.normalization", "Σ_{α,β} d(α,β)=1", "sum over a complete exclusive set"},
      {"histories", "histories.hermiticity", "d(α,β)=conj d(β,α)", "decoherence matrix minus its adjoint"},
      {"histories", "histories.diagonal_range", "0 ≤ d(α,α) ≤ 1", "largest violation of the unit interval"},
      {"histories", "histories.hpo_idempotent", "(α₁⊗…⊗αₙ)²=α₁⊗…⊗αₙ", "tensor-product projector"},
      {"histories", "histories.class_not_projector", "class operator C̃_α is not a projector",
       "spectral norm of C̃²−C̃ on the non-commuting instance"},
      {"histories", "histories.identity_insertion", "d invariant under inserting 1 at an extra time",
       "coarse-graining neutrality"},
      {"histories", "histories.additivity", "d(α∨α′,β)=d(α,β)+d(α′,β)", "disjoint coarse-graining"},
  };
  return table;
}

// --- recording ---------------------------------------------------------------

class Recorder {
 public:
  explicit Recorder(SuiteReport& report) : report_(report) {}

  void record(const std::string& id, double measured, double threshold, Relation relation,
              std::string note = {}) {
    const auto& table = catalogue();
    const auto it = std::find_if(table.begin(), table.end(), [&](const CheckInfo& c) {
      return c.suite == report_.suite && c.id == id;
    });
    if (it == table.end()) throw std::logic_error("check not in catalogue: " + id);
    Check c{id, it->anchor, measured, threshold, relation, false, std::move(note)};
    switch (relation) {
      case Relation::at_most: c.pass = measured <= threshold; break;
      case Relation::at_least: c.pass = measured >= threshold; break;
      case Relation::less_than: c.pass = measured < threshold; break;
    }
    if (!std::isfinite(measured)) c.pass = false;
    report_.checks.push_back(std::move(c));
  }
  void at_most(const std::string& id, double measured, double threshold, std::string note = {}) {
    record(id, measured, threshold, Relation::at_most, std::move(note));
  }

 private:
  SuiteReport& report_;
};

// --- sampling ----------------------------------------------------------------

class Sampler {
 public:
  Sampler(std::uint64_t seed, std::size_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    rng_.seed(seq);
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  VectorXc real_vector(Index n) {
    VectorXc v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
    return v;
  }
  VectorXc complex_vector(Index n) {
    VectorXc v(n);
    for (Index i = 0; i < n; ++i) v[i] = Complex(uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    return v;
  }
  TestFunction real_function(const Grid& g) { return TestFunction(g, real_vector(g.size())); }
  TestFunction complex_function(const Grid& g) { return TestFunction(g, complex_vector(g.size())); }
  MatrixXc complex_matrix(Index n) {
    MatrixXc m(n, n);
    for (Index j = 0; j < n; ++j) m.col(j) = complex_vector(n);
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

TestFunction apply_real(const TestFunction& f, const std::function<double(double)>& fn) {
  VectorXc v(f.size());
  for (Index i = 0; i < f.size(); ++i) v[i] = fn(f[i].real());
  return TestFunction(f.grid(), std::move(v));
}

QuadraticOperator exp_ad_series(const QuadraticOperator& generator, const QuadraticOperator& b,
                                double tol) {
  // sum_k ad_G^k(b) / k!, stopped when the terms stop mattering
  auto term = b;
  auto sum = b;
  for (int k = 1; k < 400; ++k) {
    term = commutator(generator, term) * Complex(1.0 / static_cast<double>(k));
    sum = sum + term;
    if (term.max_abs() < tol * 1e-3) break;
  }
  return sum;
}

double spectral_norm(const MatrixXc& m) {
  Eigen::JacobiSVD<MatrixXc> svd(m);
  return svd.singularValues()(0);
}

// --- suites ------------------------------------------------------------------

void suite_cha(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const TimeLattice lat = cfg.lattice();
  const auto modes = ModeSpace::on(lat);
  const Units& u = cfg.units;
  const double a = std::sqrt(u.mass * u.omega / (2.0 * u.hbar));
  const double c = 1.0 / std::sqrt(2.0 * u.mass * u.omega * u.hbar);
  double xx = 0, pp = 0, xp = 0, bb = 0, herm = 0;
  for (Index s = 0; s < cfg.samples; ++s) {
    const auto f = rng.real_function(lat.grid());
    const auto g = rng.real_function(lat.grid());
    const auto xf = smear_position(modes, f, u), xg = smear_position(modes, g, u);
    const auto pf = smear_momentum(modes, f, u), pg = smear_momentum(modes, g, u);
    xx = std::max(xx, commutator(xf, xg).max_abs());
    pp = std::max(pp, commutator(pf, pg).max_abs());
    xp = std::max(xp, residual(commutator(xf, pg),
                               QuadraticOperator::identity(modes, kI * u.hbar * inner_product(f, g))));
    const auto bf = xf * Complex(a) + pf * (kI * c);
    const auto bg = xg * Complex(a) + pg * (kI * c);
    bb = std::max(bb, residual(commutator(bf, bg.adjoint()),
                               QuadraticOperator::identity(modes, inner_product(f, g))));
    herm = std::max({herm, residual(xf.adjoint(), xf), residual(pf.adjoint(), pf)});
  }
  rec.at_most("cha.xx", xx, cfg.tol.exact);
  rec.at_most("cha.pp", pp, cfg.tol.exact);
  rec.at_most("cha.xp", xp, cfg.tol.exact);
  rec.at_most("cha.bb", bb, cfg.tol.exact);
  rec.at_most("cha.hermitian", herm, cfg.tol.exact);
}

void suite_hamiltonian(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const TimeLattice lat = cfg.lattice();
  const auto modes = ModeSpace::on(lat);
  const Units& u = cfg.units;
  const double mw = u.mass * u.omega;
  const auto basis = FockBasis::make(modes, 1);
  double hx = 0, hp = 0, hh = 0, hb = 0, vac = 0, rx = 0, rp = 0, aut = 0, wn = 0;
  for (Index s = 0; s < cfg.samples; ++s) {
    const auto chi = rng.real_function(lat.grid());
    const auto chi2 = rng.real_function(lat.grid());
    const auto f = rng.real_function(lat.grid());
    const auto g = rng.real_function(lat.grid());
    const auto H = build_H(modes, chi, u);
    const auto chif = chi.pointwise(f);
    hx = std::max(hx, residual(commutator(H, smear_position(modes, f, u)),
                               smear_momentum(modes, chif, u) * (-kI * u.hbar / u.mass)));
    hp = std::max(hp, residual(commutator(H, smear_momentum(modes, f, u)),
                               smear_position(modes, chif, u) * (kI * u.hbar * mw * u.omega)));
    hh = std::max(hh, commutator(H, build_H(modes, chi2, u)).max_abs());
    hb = std::max(hb, residual(commutator(H, annihilator(modes, f)),
                               annihilator(modes, chif) * Complex(-u.hbar * u.omega)));
    const VectorXc h0 = to_matrix(H, *basis) * vacuum(basis).amplitudes;
    vac = std::max(vac, h0.cwiseAbs().maxCoeff());

    const auto U = oscillator_evolution(modes, chi, u);
    const auto cosf = apply_real(chi, [&](double x) { return std::cos(u.omega * x); }).pointwise(f);
    const auto sinf = apply_real(chi, [&](double x) { return std::sin(u.omega * x); }).pointwise(f);
    rx = std::max(rx, residual(gaussian_conjugate(smear_position(modes, f, u), U),
                               smear_position(modes, cosf, u) +
                                   smear_momentum(modes, sinf, u) * Complex(1.0 / mw)));
    rp = std::max(rp, residual(gaussian_conjugate(smear_momentum(modes, f, u), U),
                               smear_position(modes, sinf, u) * Complex(-mw) +
                                   smear_momentum(modes, cosf, u)));
    const auto A = smear_position(modes, f, u) + build_H(modes, chi2, u);
    const auto B = smear_momentum(modes, g, u) +
                   QuadraticOperator(modes, 0.0, VectorXc::Zero(modes->size()),
                                     VectorXc::Zero(modes->size()),
                                     MatrixXc::Zero(modes->size(), modes->size()),
                                     rng.complex_matrix(modes->size()),
                                     MatrixXc::Zero(modes->size(), modes->size()));
    aut = std::max(aut, residual(gaussian_conjugate(commutator(A, B), U),
                                 commutator(gaussian_conjugate(A, U), gaussian_conjugate(B, U))));
    wn = std::max(wn, std::abs(white_noise_correlation(f, g, basis, u) -
                               u.hbar / (2.0 * mw) * inner_product(f, g)));
  }
  rec.at_most("hamiltonian.hx", hx, cfg.tol.exact);
  rec.at_most("hamiltonian.hp", hp, cfg.tol.exact);
  rec.at_most("hamiltonian.hh", hh, cfg.tol.exact);
  rec.at_most("hamiltonian.hb", hb, cfg.tol.exact);
  rec.at_most("hamiltonian.vacuum", vac, cfg.tol.exact);
  rec.at_most("hamiltonian.rotation_x", rx, cfg.tol.exact);
  rec.at_most("hamiltonian.rotation_p", rp, cfg.tol.exact);
  rec.at_most("hamiltonian.automorphism", aut, cfg.tol.exact);
  rec.at_most("hamiltonian.white_noise", wn, cfg.tol.exact);
}

void suite_nparticle(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const TimeLattice lat(cfg.nparticle_modes, cfg.dt, cfg.boundary);
  const auto modes = ModeSpace::on(lat);
  const auto basis = FockBasis::make(modes, cfg.n_max);
  const Units& u = cfg.units;
  const double hw = u.hbar * u.omega;

  const auto H1 = build_H(modes, TestFunction::constant(lat.grid(), 1.0), u);
  double blocks = 0;
  for (int n = 0; n <= cfg.n_max; ++n) {
    if (basis->block_size(n) > kDenseCeiling) continue;  // covered by the eigen-residuals below
    for (double e : spectrum(H1, *basis, n)) blocks = std::max(blocks, std::abs(e - n * hw));
  }
  const SparseMatrixXc h1 = to_matrix(H1, *basis);

  const auto chi = rng.real_function(lat.grid());
  const SparseMatrixXc h = to_matrix(build_H(modes, chi, u), *basis);
  const SparseMatrixXc T = to_matrix(build_center_of_time(modes), *basis);
  double hchi = 0, repeated = 0, center = 0;
  for (Index s = 0; s < basis->dimension(); ++s) {
    const auto& occ = basis->state(s);
    std::vector<Index> times;
    double energy = 0.0, total_time = 0.0;
    int total = 0;
    bool has_repeat = false;
    for (Index m = 0; m < modes->size(); ++m)
      for (int k = 0; k < occ[m]; ++k) {
        times.push_back(m);
        energy += hw * chi[m].real();
        total_time += lat.time(m);
        ++total;
        if (k > 0) has_repeat = true;
      }
    const auto state = n_particle_vector(times, basis);
    const double scale = std::max(1.0, state.norm());
    const double r_chi = (h * state.amplitudes - energy * state.amplitudes).cwiseAbs().maxCoeff() / scale;
    hchi = std::max(hchi, r_chi);
    if (has_repeat) repeated = std::max(repeated, r_chi);
    center = std::max(center, (T * state.amplitudes - total_time * state.amplitudes).cwiseAbs().maxCoeff() / scale);
    blocks = std::max(blocks, (h1 * state.amplitudes - total * hw * state.amplitudes).cwiseAbs().maxCoeff() / scale);
  }
  rec.at_most("nparticle.h1_blocks", blocks, cfg.tol.exact);
  rec.at_most("nparticle.h_chi", hchi, cfg.tol.exact);
  rec.at_most("nparticle.repeated", repeated, cfg.tol.exact,
              cfg.n_max >= 2 ? "" : "n_max < 2: no repeated-time states in the basis");
  rec.at_most("nparticle.center_of_time", center, cfg.tol.exact);
}

void suite_heisenberg(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const TimeLattice lat = cfg.lattice();
  const auto modes = ModeSpace::on(lat);
  const Units& u = cfg.units;
  const double mw = u.mass * u.omega;

  double covariant = 0;
  for (Index s = 0; s < cfg.samples; ++s) {
    const auto k1 = rng.real_function(lat.grid()), k2 = rng.real_function(lat.grid());
    const auto f = rng.real_function(lat.grid()), g = rng.real_function(lat.grid());
    const auto x1 = gaussian_conjugate(smear_position(modes, f, u), oscillator_evolution(modes, k1, u));
    const auto x2 = gaussian_conjugate(smear_position(modes, g, u), oscillator_evolution(modes, k2, u));
    Complex expected = 0.0;
    for (Index i = 0; i < lat.n_points(); ++i)
      expected += f[i] * g[i] * lat.dt() * std::sin(u.omega * (k2[i].real() - k1[i].real()));
    expected *= kI * u.hbar / mw;
    covariant = std::max(covariant,
                         residual(commutator(x1, x2), QuadraticOperator::identity(modes, expected)));
  }
  rec.at_most("heisenberg.covariant", covariant, cfg.tol.exact);

  // directional derivative along the indicator of one lattice point
  const auto f = rng.real_function(lat.grid());
  const Index site = lat.n_points() / 3;
  VectorXc bump = VectorXc::Zero(lat.n_points());
  bump[site] = 1.0;
  const TestFunction e_s(lat, bump);
  const auto x = smear_position(modes, f, u);
  const auto target = smear_momentum(modes, e_s * f[site], u) * Complex(1.0 / u.mass);
  auto conj_at = [&](double h) { return gaussian_conjugate(x, oscillator_evolution(modes, e_s * h, u)); };
  auto fd_error = [&](double h) {
    return residual((conj_at(h) - conj_at(-h)) * Complex(1.0 / (2.0 * h)), target);
  };
  const double h = cfg.fd_step;
  const double e1 = fd_error(h), e2 = fd_error(h / 2);
  // |c| (1 - sin(w h)/(w h)) <= |c| (w h)^2 / 6, plus rounding of sin(w h)/(w h)
  const double eps = std::numeric_limits<double>::epsilon();
  const double bound = target.max_abs() * (std::pow(u.omega * h, 2) / 6.0 + 8.0 * eps);
  rec.at_most("heisenberg.derivative", e1, bound);
  rec.record("heisenberg.derivative_order", e2 > 0 ? e1 / e2 : 0.0, cfg.tol.fd_ratio, Relation::at_least,
             "errors at h and h/2: " + std::to_string(e1) + ", " + std::to_string(e2));

  // second derivative: d²/dh² x_{h e_s} = -w² f_s x_s
  const double h2 = 1e-3;
  const auto second = (conj_at(h2) - x * Complex(2.0) + conj_at(-h2)) * Complex(1.0 / (h2 * h2));
  const auto eom = second + smear_position(modes, e_s * f[site], u) * Complex(u.omega * u.omega);
  // (2cos(w h) - 2)/h² + w² = O(w⁴h²/12), plus rounding of cos amplified by 1/h²
  const double eom_bound = x.max_abs() * (std::pow(u.omega, 4) * h2 * h2 / 12.0 + 4.0 * eps / (h2 * h2));
  rec.at_most("heisenberg.equation_of_motion", eom.max_abs(), eom_bound);
}

void suite_coherent(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const TimeLattice lat = cfg.lattice();
  const auto modes = ModeSpace::on(lat);
  const auto basis = FockBasis::make(modes, cfg.coherent_n_max);
  auto unit = [&] {
    auto phi = rng.complex_function(lat.grid());
    return phi * Complex(1.0 / std::sqrt(inner_product(phi, phi).real()));
  };
  double law = 0, partial = 0, tail_formula = 0, eigen = 0;
  Index tail_dominated = 0;
  for (Index s = 0; s < cfg.coherent_samples; ++s) {
    // psi leans towards phi so that |<phi,psi>| covers (0, 1), not just ~1/sqrt(dim)
    const auto dir = unit(), other = unit();
    const double beta = rng.uniform(0.0, 0.5 * kPi);
    const auto phi = dir * Complex(rng.uniform(0.05, 1.0));
    const auto psi = (dir * Complex(std::cos(beta)) + other * Complex(std::sin(beta)));
    const auto psi_scaled = psi * std::polar(rng.uniform(0.05, 1.0) / std::sqrt(inner_product(psi, psi).real()),
                                             rng.uniform(-kPi, kPi));
    const auto a = coherent_vector(phi, basis), b = coherent_vector(psi_scaled, basis);
    const Complex z = inner_product(phi, psi_scaled);
    const Complex overlap = a.inner(b);
    const double tail = exponential_tail(std::abs(z), cfg.coherent_n_max);
    // the tail falls below double precision for small |z|: allow the a-priori
    // rounding bound of the amplitudes (n_max products each) and of the dot product
    const double ops = static_cast<double>(basis->dimension() + 4 * cfg.coherent_n_max + 16);
    const double rounding = ops * std::numeric_limits<double>::epsilon() *
                            (a.amplitudes.cwiseAbs().dot(b.amplitudes.cwiseAbs()) + std::exp(std::abs(z)));
    law = std::max(law, std::abs(overlap - std::exp(z)) / (tail + rounding));
    if (tail > rounding) ++tail_dominated;
    Complex series = 0.0, term = 1.0;
    for (int n = 0; n <= cfg.coherent_n_max; ++n) {
      series += term;
      term *= z / static_cast<double>(n + 1);
    }
    partial = std::max(partial, std::abs(overlap - series));
    double head = 0.0, t = 1.0;
    for (int n = 0; n <= cfg.coherent_n_max; ++n) {
      head += t;
      t *= std::abs(z) / static_cast<double>(n + 1);
    }
    tail_formula = std::max(tail_formula, std::abs(tail - (std::exp(std::abs(z)) - head)));
    if (s < 3) {
      const auto f = rng.complex_function(lat.grid());
      const VectorXc out = to_matrix(annihilator(modes, f), *basis) * a.amplitudes;
      const Index keep = basis->block_offset(cfg.coherent_n_max);
      eigen = std::max(eigen, (out.head(keep) - inner_product(f, phi) * a.amplitudes.head(keep))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  }
  rec.at_most("coherent.overlap_law", law, 1.0,
              std::to_string(tail_dominated) + " of " + std::to_string(cfg.coherent_samples) +
                  " samples with the tail above the rounding allowance");
  rec.at_most("coherent.partial_sum", partial, cfg.tol.exact);
  rec.at_most("coherent.tail_bound", tail_formula, cfg.tol.exact);
  rec.at_most("coherent.eigenvector", eigen, cfg.tol.exact);
}

void suite_angular(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const Units& u = cfg.units;
  double central = 0, anti = 0;
  for (Index n : cfg.angular_refinements) {
    const TimeLattice lat(n, cfg.angular_span / static_cast<double>(n));
    const auto modes = ModeSpace::on(lat, 3);
    const auto chi = TestFunction::sample(lat, [&](double t) {
      return 0.3 * std::sin(2.0 * kPi * t / cfg.angular_span);
    });
    const auto zero = TestFunction::zero(lat.grid());
    std::vector<Index> eps_list{1};
    if (n == cfg.angular_refinements.back()) eps_list = cfg.angular_eps_steps;
    for (Index eps : eps_list) {
      for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
          const auto Li = build_angular_momentum(modes, i, chi, eps, u);
          const auto Lj = build_angular_momentum(modes, j, zero, eps, u);
          central = std::max(central, std::abs(central_term(Li, Lj)));
          if (i == j) anti = std::max(anti, commutator(Li, Li).max_abs());
        }
    }
  }
  (void)rng;
  rec.at_most("angular.central", central + cfg.inject_central_term, cfg.tol.exact,
              cfg.inject_central_term != 0.0 ? "includes injected central term (test hook)" : "");
  rec.at_most("angular.antisymmetry", anti, cfg.tol.exact);

  const TimeLattice lat(cfg.angular_refinements.front(),
                        cfg.angular_span / static_cast<double>(cfg.angular_refinements.front()));
  const auto modes = ModeSpace::on(lat, 3);
  const auto zero = TestFunction::zero(lat.grid());
  const auto L1 = build_angular_momentum(modes, 1, zero, 0, u);
  const auto L2 = build_angular_momentum(modes, 2, zero, 0, u);
  const auto L3 = build_angular_momentum(modes, 3, zero, 0, u);
  rec.at_most("angular.coincident",
              std::max({residual(commutator(L1, L2), L3 * (kI * u.hbar)),
                        residual(commutator(L2, L3), L1 * (kI * u.hbar)),
                        residual(commutator(L3, L1), L2 * (kI * u.hbar))}),
              cfg.tol.exact);
  rec.at_most("angular.hermitian",
              std::max({residual(L1.adjoint(), L1), residual(L2.adjoint(), L2),
                        residual(L3.adjoint(), L3)}),
              cfg.tol.exact);

  auto worst_ratio = [](const std::vector<double>& d, std::string& note) {
    double worst = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      note += (k ? ", " : "defects: ") + std::to_string(d[k]);
      if (k > 0) worst = std::max(worst, d[k] / d[k - 1]);
    }
    return worst;
  };
  std::vector<double> by_dt;
  for (Index n : cfg.angular_refinements) by_dt.push_back(angular_defect(n, cfg.angular_span, 1, u));
  std::string note_dt;
  rec.record("angular.dt_refinement", worst_ratio(by_dt, note_dt), 1.0, Relation::less_than, note_dt);
  std::vector<double> by_eps;
  for (Index eps : cfg.angular_eps_steps)
    by_eps.push_back(angular_defect(cfg.angular_refinements.back(), cfg.angular_span, eps, u));
  std::string note_eps;
  rec.record("angular.eps_refinement", worst_ratio(by_eps, note_eps), 1.0, Relation::less_than, note_eps);
}

void suite_velocity(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const TimeLattice lat = cfg.lattice();
  const auto modes = ModeSpace::on(lat);
  const Units& u = cfg.units;
  const auto basis = FockBasis::make(modes, 1);
  const Index n = lat.n_points();
  double xxdot = 0, cha = 0, green = 0, reduction = 0, flow = 0;

  for (double lambda : cfg.lambdas) {
    const VelocityExtendedModel model(modes, lambda, u);
    for (Index s = 0; s < std::min<Index>(cfg.samples, 10); ++s) {
      const auto f = rng.real_function(lat.grid()), g = rng.real_function(lat.grid());
      xxdot = std::max(xxdot, commutator(model.position(f), model.velocity(g)).max_abs());
      cha = std::max(cha, residual(commutator(model.position(f), model.momentum(g)),
                                   QuadraticOperator::identity(modes, kI * u.hbar * inner_product(f, g))));
    }
    // two-point function on Fock vectors, one lattice delta per site
    std::vector<VectorXc> columns;
    for (Index a = 0; a < n; ++a) {
      VectorXc d = VectorXc::Zero(n);
      d[a] = 1.0 / lat.dt();
      columns.push_back(to_matrix(model.position(TestFunction(lat, d)), *basis) * vacuum(basis).amplitudes);
    }
    const MatrixXc expected = u.hbar / (2.0 * u.mass) * greens_kernel(model.frequency());
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        green = std::max(green, std::abs(columns[a].dot(columns[b]) - expected(a, b)));

    if (lambda == 0.0) {
      const auto chi = rng.real_function(lat.grid());
      const auto f = rng.real_function(lat.grid());
      reduction = std::max({reduction, residual(model.hamiltonian(chi), build_H(modes, chi, u)),
                            residual(model.position(f), smear_position(modes, f, u)),
                            residual(model.momentum(f), smear_momentum(modes, f, u))});
    }
    const double c = 0.1;
    const auto H = model.hamiltonian(TestFunction::constant(lat.grid(), c));
    const auto cf = model.annihilator(rng.real_function(lat.grid()));
    flow = std::max(flow, residual(gaussian_conjugate(cf, model.evolution(c)),
                                   exp_ad_series(H * (kI / u.hbar), cf, cfg.tol.exact)));
  }
  rec.at_most("velocity.xxdot", xxdot, cfg.tol.exact);
  rec.at_most("velocity.cha", cha, cfg.tol.exact);
  rec.at_most("velocity.green", green, cfg.tol.greens);
  if (std::find(cfg.lambdas.begin(), cfg.lambdas.end(), 0.0) == cfg.lambdas.end()) {
    const VelocityExtendedModel model(modes, 0.0, u);
    const auto chi = rng.real_function(lat.grid());
    reduction = residual(model.hamiltonian(chi), build_H(modes, chi, u));
  }
  rec.at_most("velocity.reduction", reduction, cfg.tol.exact);
  rec.at_most("velocity.flow", flow, cfg.tol.field);
}

void suite_qft(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const Units& u = cfg.units;
  const SpacetimeLattice lat(cfg.qft_grid, cfg.qft_spacing, cfg.foliation);
  if (!lat.has_default_foliation())
    throw UnsupportedFeature("the free-field suite only realizes the default foliation");
  const FreeFieldModel model(lat, cfg.field_mass, u);
  const TimeLattice axis = lat.time_axis();
  const Index trials = std::min<Index>(cfg.samples, 3);
  double cha = 0, hphi = 0, hh = 0;
  for (Index s = 0; s < trials; ++s) {
    const auto f = rng.real_function(lat.grid()), g = rng.real_function(lat.grid());
    const auto chi = rng.real_function(axis.grid()), chi2 = rng.real_function(axis.grid());
    cha = std::max(cha, residual(commutator(model.field(f), model.conjugate_momentum(g)),
                                 QuadraticOperator::identity(model.modes(), kI * u.hbar * inner_product(f, g))));
    const auto H = model.hamiltonian(chi);
    hphi = std::max(hphi, residual(commutator(H, model.field(f)),
                                   model.conjugate_momentum(model.lift(chi).pointwise(f)) * (-kI * u.hbar)));
    if (s == 0) hh = commutator(H, model.hamiltonian(chi2)).max_abs();
  }
  rec.at_most("qft.cha", cha, cfg.tol.field);
  rec.at_most("qft.h_phi", hphi, cfg.tol.field);
  rec.at_most("qft.hh", hh, cfg.tol.field);
  double floor = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < model.Kn().eigenvalues().size(); ++i)
    floor = std::min(floor, model.Kn().eigenvalues()[i].real());
  rec.record("qft.kn_floor", floor - cfg.field_mass * cfg.field_mass, -cfg.tol.exact, Relation::at_least);

  // dense oracle on the small grid
  const SpacetimeLattice small(cfg.qft_oracle_grid, cfg.qft_spacing, cfg.foliation);
  const FreeFieldModel oracle_model(small, cfg.field_mass, u);
  const TimeLattice small_axis = small.time_axis();
  const auto chi = rng.real_function(small_axis.grid());
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(build_Kn(small, cfg.field_mass).to_matrix());
  const MatrixXc root = solver.operatorSqrt();
  const MatrixXc generator = -kI * (oracle_model.lift(chi).values().asDiagonal() * root);
  const MatrixXc dense = generator.exp();
  const auto U = oracle_model.evolution(chi);
  rec.at_most("qft.expm", (U.matrix() - dense).cwiseAbs().maxCoeff(), cfg.tol.field);
  const auto b = oracle_model.annihilator(rng.real_function(small.grid()));
  const auto H = oracle_model.hamiltonian(chi);
  rec.at_most("qft.series",
              residual(gaussian_conjugate(b, U), exp_ad_series(H * (kI / u.hbar), b, cfg.tol.field)),
              cfg.tol.field);
}

void suite_histories(const SuiteConfig& cfg, Recorder& rec, Sampler& rng) {
  const Units& u = cfg.units;
  const auto sys = SingleTimeSystem::truncated_oscillator(cfg.history_levels, u);
  const auto [plus, minus] = position_sign_projectors(cfg.history_levels, u);
  const auto set = complete_history_set(cfg.history_times, {plus, minus});
  const MatrixXc d = decoherence_matrix(set, sys);
  rec.at_most("histories.normalization", std::abs(d.sum() - Complex(1.0)), cfg.tol.exact);
  rec.at_most("histories.hermiticity", (d - d.adjoint()).cwiseAbs().maxCoeff(), cfg.tol.exact);
  double violation = 0.0;
  for (Index i = 0; i < d.rows(); ++i)
    violation = std::max({violation, -d(i, i).real(), d(i, i).real() - 1.0, std::abs(d(i, i).imag())});
  rec.at_most("histories.diagonal_range", std::max(violation, 0.0), cfg.tol.exact);

  // designated instance: x > 0 at the first time, x < 0 at the second
  std::vector<MatrixXc> slots;
  for (std::size_t k = 0; k < cfg.history_times.size(); ++k) slots.push_back(k % 2 == 0 ? plus : minus);
  const HistoryProposition designated(cfg.history_times, slots);
  const MatrixXc p = hpo_projector(designated);
  rec.at_most("histories.hpo_idempotent", (p * p - p).cwiseAbs().maxCoeff(), cfg.tol.projector);
  const MatrixXc c = class_operator(designated, sys);
  rec.record("histories.class_not_projector", spectral_norm(c * c - c), cfg.tol.contrast, Relation::at_least);

  const auto& times = cfg.history_times;
  const double t_extra = times.size() > 1 ? 0.5 * (times[0] + times[1]) : times[0] + 0.5;
  double insertion = 0.0;
  for (const auto& beta : set)
    insertion = std::max(insertion, std::abs(decoherence(designated.with_identity_at(t_extra), beta, sys) -
                                             decoherence(designated, beta, sys)));
  rec.at_most("histories.identity_insertion", insertion, cfg.tol.exact);

  // split the first slot of the designated history into two orthogonal pieces
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(plus);
  const Index rank = projector_rank(plus);
  const MatrixXc vecs = solver.eigenvectors().rightCols(rank);
  const Index cut = std::max<Index>(rank / 2, 1);
  const MatrixXc first = vecs.leftCols(cut) * vecs.leftCols(cut).adjoint();
  auto with_first = [&](const MatrixXc& proj) {
    auto s = slots;
    s[0] = proj;
    return HistoryProposition(cfg.history_times, s);
  };
  double additivity = 0.0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto& beta = set[k];
    additivity = std::max(additivity, std::abs(decoherence(designated, beta, sys) -
                                               decoherence(with_first(first), beta, sys) -
                                               decoherence(with_first(plus - first), beta, sys)));
  }
  (void)rng;
  rec.at_most("histories.additivity", additivity, cfg.tol.exact);
}

using SuiteFn = void (*)(const SuiteConfig&, Recorder&, Sampler&);

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> table{
      {"cha", suite_cha},           {"hamiltonian", suite_hamiltonian},
      {"nparticle", suite_nparticle}, {"heisenberg", suite_heisenberg},
      {"coherent", suite_coherent}, {"angular", suite_angular},
      {"velocity", suite_velocity}, {"qft", suite_qft},
      {"histories", suite_histories},
  };
  return table;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Relation r) {
  switch (r) {
    case Relation::at_most: return "<=";
    case Relation::at_least: return ">=";
    case Relation::less_than: return "<";
  }
  return "?";
}

bool SuiteReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"cha",      "hamiltonian", "nparticle",
                                              "heisenberg", "coherent",  "angular",
                                              "velocity", "qft",         "histories"};
  return names;
}

const std::vector<CheckInfo>& check_catalogue() { return catalogue(); }

std::vector<CheckInfo> checks_of(const std::string& suite) {
  std::vector<CheckInfo> out;
  for (const auto& c : catalogue())
    if (c.suite == suite) out.push_back(c);
  if (out.empty()) throw PreconditionError("unknown suite '" + suite + "'");
  return out;
}

void SuiteConfig::validate() const {
  auto fail = [](const std::string& what) { throw PreconditionError("invalid configuration: " + what); };
  if (n_points < 2) fail("lattice.n_points must be >= 2");
  if (!(dt > 0.0)) fail("lattice.dt must be positive");
  if (!(units.hbar > 0.0) || !(units.mass > 0.0) || !(units.omega > 0.0))
    fail("physics.hbar, physics.mass and physics.omega must be positive");
  for (double l : lambdas)
    if (!(l >= 0.0)) fail("physics.lambda entries must be non-negative");
  if (!(field_mass >= 0.0)) fail("physics.field_mass must be non-negative");
  if (n_max < 1) fail("fock.n_max must be >= 1");
  if (coherent_n_max < 0) fail("fock.coherent_n_max must be >= 0");
  if (nparticle_modes < 1) fail("fock.nparticle_modes must be >= 1");
  if (FockBasis::dimension_for(nparticle_modes, n_max) > static_cast<double>(kDenseCeiling) && !allow_sparse)
    fail("infeasible: n-particle Fock dimension " +
         std::to_string(static_cast<long long>(FockBasis::dimension_for(nparticle_modes, n_max))) +
         " exceeds the dense ceiling " + std::to_string(kDenseCeiling) + " (set fock.allow_sparse)");
  if (FockBasis::dimension_for(nparticle_modes, n_max) > 5e6 ||
      FockBasis::dimension_for(n_points, coherent_n_max) > 5e6)
    fail("infeasible: Fock dimension above 5e6");
  if (angular_refinements.size() < 2) fail("angular.refinements needs at least two lattices");
  for (std::size_t k = 0; k < angular_refinements.size(); ++k) {
    if (angular_refinements[k] < 2) fail("angular.refinements entries must be >= 2");
    if (k > 0 && angular_refinements[k] <= angular_refinements[k - 1])
      fail("angular.refinements must increase");
  }
  if (angular_eps_steps.size() < 2) fail("angular.eps_steps needs at least two entries");
  for (std::size_t k = 0; k < angular_eps_steps.size(); ++k) {
    if (angular_eps_steps[k] < 1 || angular_eps_steps[k] >= angular_refinements.back())
      fail("angular.eps_steps entries must lie in [1, finest lattice size)");
    if (k > 0 && angular_eps_steps[k] >= angular_eps_steps[k - 1])
      fail("angular.eps_steps must decrease");
  }
  if (!(angular_span > 0.0)) fail("angular.span must be positive");
  for (int a = 0; a < 4; ++a) {
    if (qft_grid[a] < 1 || qft_oracle_grid[a] < 1) fail("qft grids need positive extents");
    if (!(qft_spacing[a] > 0.0)) fail("qft.spacing must be positive");
  }
  if (qft_grid[0] < 2 || qft_oracle_grid[0] < 2) fail("qft grids need at least two time slices");
  if (qft_grid[0] * qft_grid[1] * qft_grid[2] * qft_grid[3] > 4096)
    fail("infeasible: qft.grid above 4096 sites");
  if (history_levels < 2) fail("histories.levels must be >= 2");
  if (history_times.empty()) fail("histories.times must not be empty");
  for (std::size_t k = 1; k < history_times.size(); ++k)
    if (!(history_times[k] > history_times[k - 1])) fail("histories.times must increase");
  if (!(fd_step > 0.0)) fail("heisenberg.fd_step must be positive");
  if (samples < 1 || coherent_samples < 1) fail("run.samples must be >= 1");
  const double tols[] = {tol.exact, tol.field, tol.greens, tol.projector, tol.contrast, tol.fd_ratio};
  for (double t : tols)
    if (!(t > 0.0)) fail("tolerances must be positive");
}

SuiteReport run_suite(const std::string& name, const SuiteConfig& config) {
  const auto& table = registry();
  const auto it = table.find(name);
  if (it == table.end()) throw PreconditionError("unknown suite '" + name + "'");
  config.validate();
  const auto names = suite_names();
  const auto stream = static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());

  SuiteReport report;
  report.suite = name;
  report.config = config;
  Recorder rec(report);
  Sampler rng(config.seed, stream);
  const auto start = std::chrono::steady_clock::now();
  it->second(config, rec, rng);
  std::stable_sort(report.checks.begin(), report.checks.end(),
                   [](const Check& a, const Check& b) { return a.id < b.id; });
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double angular_defect(Index n, double span, Index eps_steps, const Units& units) {
  const TimeLattice lat(n, span / static_cast<double>(n));
  const auto modes = ModeSpace::on(lat, 3);
  const double w = 2.0 * kPi / span;
  const auto chi = TestFunction::sample(lat, [w](double t) { return 0.3 * std::sin(w * t); });
  const auto g = TestFunction::sample(lat, [w](double t) { return 1.0 + 0.5 * std::cos(w * t); });
  const auto h = TestFunction::sample(lat, [w](double t) { return 1.0 + 0.3 * std::sin(w * t); });
  const auto zero = TestFunction::zero(lat.grid());
  const auto L1 = build_angular_momentum(modes, 1, chi, eps_steps, units, g);
  const auto L2 = build_angular_momentum(modes, 2, zero, eps_steps, units, h);
  const auto L3 = build_angular_momentum(modes, 3, zero, 0, units, g.pointwise(h));
  const MatrixXc defect = commutator(L1, L2).number() - kI * units.hbar * L3.number();
  // smooth coherent amplitudes z_{t,j} = sqrt(dt) phi_j(t)
  VectorXc z(modes->size());
  for (Index t = 0; t < n; ++t) {
    const double s = lat.time(t);
    const Complex phi[3] = {std::polar(1.0 + 0.2 * std::cos(w * s), w * s),
                            Complex(0.5 + 0.4 * std::sin(w * s), 0.1),
                            Complex(std::cos(2.0 * w * s), 0.3 * std::sin(w * s))};
    for (Index j = 0; j < 3; ++j) z[modes->mode(t, j)] = std::sqrt(lat.dt()) * phi[j];
  }
  return std::abs(z.dot(defect * z));
}

}  // namespace hpo
