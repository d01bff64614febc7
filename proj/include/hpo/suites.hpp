#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hpo/lattice.hpp"
#include "hpo/models.hpp"

namespace hpo {

struct Tolerances {
  double exact = 1e-12;      // symbolic identities on unit-scale problems
  double field = 1e-10;      // free-field identities and dense oracles
  double greens = 1e-10;     // velocity-extended two-point function
  double projector = 1e-13;  // idempotence of tensor-product projectors
  double contrast = 0.1;     // minimum ||C^2 - C|| on the non-commuting instance
  double fd_ratio = 3.9;     // minimum error reduction when the step is halved
};

/// Everything a suite needs. Defaults are the desk-scale sizes.
struct SuiteConfig {
  // time lattice shared by the single-particle suites
  Index n_points = 16;
  double dt = 0.25;
  Boundary boundary = Boundary::periodic;

  Units units;
  std::vector<double> lambdas{0.0, 0.5, 1.0};
  double field_mass = 1.0;
  Eigen::Vector4d foliation{1.0, 0.0, 0.0, 0.0};

  int n_max = 3;
  int coherent_n_max = 6;
  Index nparticle_modes = 8;
  bool allow_sparse = false;

  // point-splitting protocol: dt halving at eps = one step, then fixed dt
  // (the finest lattice) with eps_steps decreasing
  double angular_span = 2.0;
  std::vector<Index> angular_refinements{8, 16, 32, 64};
  std::vector<Index> angular_eps_steps{4, 3, 2, 1};

  std::array<Index, 4> qft_grid{8, 4, 4, 4};
  std::array<double, 4> qft_spacing{0.5, 0.5, 0.5, 0.5};
  std::array<Index, 4> qft_oracle_grid{2, 2, 2, 2};

  Index history_levels = 8;
  std::vector<double> history_times{0.4, 1.3};

  double fd_step = 1e-5;
  Index samples = 50;
  Index coherent_samples = 20;
  std::uint64_t seed = 20240601;
  Tolerances tol;

  /// Test hook: added to every measured central term of the angular suite.
  double inject_central_term = 0.0;

  TimeLattice lattice() const { return TimeLattice(n_points, dt, boundary); }
  /// Throws PreconditionError for inconsistent or infeasible settings.
  void validate() const;
};

enum class Relation { at_most, at_least, less_than };

std::string to_string(Relation r);

struct Check {
  std::string id;
  std::string anchor;
  double measured = 0.0;
  double threshold = 0.0;
  Relation relation = Relation::at_most;
  bool pass = false;
  std::string note;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  double seconds = 0.0;
  SuiteConfig config;

  bool passed() const;
};

/// Static description of a check, used by list and trace without running.
struct CheckInfo {
  std::string suite;
  std::string id;
  std::string anchor;
  std::string description;
};

const std::vector<std::string>& suite_names();
const std::vector<CheckInfo>& check_catalogue();
std::vector<CheckInfo> checks_of(const std::string& suite);

/// Runs one suite. Unknown names and infeasible configurations throw
/// PreconditionError. Deterministic for a fixed seed.
SuiteReport run_suite(const std::string& name, const SuiteConfig& config);

// --- building blocks shared with the acceptance driver ---------------------

/// Defect |z^dag (C - i hbar M_ref) z| of the point-split rotation algebra on
/// a lattice of n points spanning `span`, for the given split (in steps).
double angular_defect(Index n, double span, Index eps_steps, const Units& units);

}  // namespace hpo
