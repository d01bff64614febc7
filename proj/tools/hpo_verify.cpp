// Command-line front end: run verification suites, list checks, print the
// anchor-to-check matrix, and export CSV/coordinate-list artifacts.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "hpo/config.hpp"
#include "hpo/fock.hpp"
#include "hpo/histories.hpp"
#include "hpo/report.hpp"
#include "hpo/suites.hpp"

namespace fs = std::filesystem;
using namespace hpo;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> suites;
  std::string out_dir;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
};

SuiteConfig resolve_config(const Options& opt) {
  SuiteConfig config = opt.config_path.empty() ? SuiteConfig{} : load_config(opt.config_path);
  if (opt.seed) config.seed = *opt.seed;
  config.validate();
  return config;
}

std::vector<std::string> selected_suites(const Options& opt) {
  if (opt.suites.empty()) return suite_names();
  for (const auto& s : opt.suites) checks_of(s);  // throws for unknown names
  return opt.suites;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
}

int cmd_run(const Options& opt) {
  const SuiteConfig config = resolve_config(opt);
  const auto suites = selected_suites(opt);
  if (!opt.out_dir.empty()) fs::create_directories(opt.out_dir);
  bool all = true;
  for (const auto& name : suites) {
    const SuiteReport report = run_suite(name, config);
    all = all && report.passed();
    for (const auto& c : report.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.id << "  measured=" << c.measured << ' '
                << to_string(c.relation) << ' ' << c.threshold << "\n";
    std::cout << "suite " << name << ": " << (report.passed() ? "PASS" : "FAIL") << " ("
              << report.seconds << " s)\n";
    if (!opt.out_dir.empty()) {
      const std::string body = opt.format == "csv" ? render_csv(report) : render_json(report);
      write_file(fs::path(opt.out_dir) / (name + "-report." + opt.format), body);
    }
  }
  return all ? 0 : 1;
}

int cmd_list(const Options& opt) {
  for (const auto& name : selected_suites(opt)) {
    std::cout << name << "\n";
    for (const auto& c : checks_of(name)) std::cout << "  " << c.id << "  " << c.description << "\n";
  }
  return 0;
}

int cmd_trace(const Options& opt) {
  const auto rows = trace_matrix();
  const std::string body = opt.format == "csv" ? render_trace_csv(rows) : trace_json(rows).dump(2) + "\n";
  if (opt.out_dir.empty()) {
    std::cout << body;
  } else {
    fs::create_directories(opt.out_dir);
    write_file(fs::path(opt.out_dir) / ("trace." + opt.format), body);
  }
  return 0;
}

int cmd_export(const Options& opt) {
  const SuiteConfig config = resolve_config(opt);
  const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
  fs::create_directories(dir);
  const Units& u = config.units;

  // the smooth time-averaging function used by the angular suite
  const TimeLattice angular(config.angular_refinements.back(),
                            config.angular_span / static_cast<double>(config.angular_refinements.back()));
  const double w = 2.0 * std::numbers::pi / config.angular_span;
  {
    std::ofstream out(dir / "angular-chi.csv");
    write_grid_function_csv(out, TestFunction::sample(angular, [w](double t) { return 0.3 * std::sin(w * t); }));
  }

  // block spectra of H(chi) on the n-particle lattice, chi(t) = t
  const TimeLattice lat(config.nparticle_modes, config.dt, config.boundary);
  const auto modes = ModeSpace::on(lat);
  const auto basis = FockBasis::make(modes, config.n_max);
  const auto H = build_H(modes, TestFunction::sample(lat, [](double t) { return t; }), u);
  std::vector<std::vector<double>> blocks;
  for (int n = 0; n <= config.n_max; ++n)
    if (basis->block_size(n) <= kDenseCeiling) blocks.push_back(spectrum(H, *basis, n));
  {
    std::ofstream out(dir / "nparticle-spectrum.csv");
    write_spectrum_csv(out, blocks);
  }

  // coherent overlap table on the shared lattice: phi_k = k/4 times a unit-norm profile
  const TimeLattice shared = config.lattice();
  const auto coherent_basis = FockBasis::make(ModeSpace::on(shared), config.coherent_n_max);
  auto profile = TestFunction::sample(shared, [&](double t) {
    return std::polar(1.0, 2.0 * std::numbers::pi * t / shared.span());
  });
  profile = profile * Complex(1.0 / std::sqrt(inner_product(profile, profile).real()));
  MatrixXc overlaps(4, 4);
  std::vector<FockVector> vectors;
  for (int k = 1; k <= 4; ++k) vectors.push_back(coherent_vector(profile * Complex(0.25 * k), coherent_basis));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) overlaps(a, b) = vectors[a].inner(vectors[b]);
  {
    std::ofstream out(dir / "coherent-overlaps.csv");
    write_matrix_csv(out, overlaps);
  }

  // decoherence functional and designated class operator of the histories suite
  const auto sys = SingleTimeSystem::truncated_oscillator(config.history_levels, u);
  const auto [plus, minus] = position_sign_projectors(config.history_levels, u);
  const auto set = complete_history_set(config.history_times, {plus, minus});
  {
    std::ofstream out(dir / "decoherence.csv");
    write_matrix_csv(out, decoherence_matrix(set, sys));
  }
  {
    std::ofstream out(dir / "class-operator.coo");
    write_coordinate_list(out, class_operator(set.front(), sys));
  }
  std::cout << "exported to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify the history-operator identities of the bosonic history algebra"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool with_suite, bool with_out) {
    sub->add_option("--config", opt.config_path, "Sectioned key-value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Override the RNG seed of the config");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    if (with_suite) sub->add_option("--suite", opt.suites, "Suite to select (repeatable)");
    if (with_out) sub->add_option("--out", opt.out_dir, "Output directory");
  };
  auto* run = app.add_subcommand("run", "Run suites; exit 0 iff every selected suite passes");
  add_common(run, true, true);
  auto* list = app.add_subcommand("list", "List suites and their checks");
  add_common(list, true, false);
  auto* trace = app.add_subcommand("trace", "Print the anchor-to-check matrix");
  add_common(trace, false, true);
  auto* exp = app.add_subcommand("export", "Write CSV and coordinate-list artifacts");
  add_common(exp, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(opt);
    if (*list) return cmd_list(opt);
    if (*trace) return cmd_trace(opt);
    if (*exp) return cmd_export(opt);
  } catch (const std::exception& e) {
    std::cerr << "hpo_verify: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
