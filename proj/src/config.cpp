#include "hpo/config.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "hpo/errors.hpp"

namespace hpo {

namespace {

using Inputs = std::vector<std::string>;
using Setter = std::function<void(SuiteConfig&, const Inputs&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& what) {
  throw PreconditionError(key.empty() ? what : "config key '" + key + "': " + what);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) bad_value(key, "cannot parse '" + text + "' as a number");
  return value;
}

const std::string& single(const std::string& key, const Inputs& in) {
  if (in.size() != 1) bad_value(key, "expected a single value");
  return in.front();
}

template <class T>
Setter scalar(T SuiteConfig::*member) {
  return [member](SuiteConfig& c, const Inputs& in) {
    c.*member = parse_number<T>("", single("", in));
  };
}

template <class Get>
Setter number_at(Get get) {
  return [get](SuiteConfig& c, const Inputs& in) { get(c) = parse_number<double>("", single("", in)); };
}

template <class T>
std::vector<T> parse_list(const Inputs& in) {
  std::vector<T> out;
  for (const auto& s : in) out.push_back(parse_number<T>("", s));
  return out;
}

template <class T, std::size_t N>
std::array<T, N> parse_array(const Inputs& in) {
  if (in.size() != N) bad_value("", "expected " + std::to_string(N) + " values");
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = parse_number<T>("", in[i]);
  return out;
}

bool parse_bool(const Inputs& in) {
  const auto& s = single("", in);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  bad_value("", "expected true or false, got '" + s + "'");
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"lattice.n_points", scalar(&SuiteConfig::n_points)},
      {"lattice.dt", scalar(&SuiteConfig::dt)},
      {"lattice.boundary",
       [](SuiteConfig& c, const Inputs& in) { c.boundary = boundary_from_string(single("", in)); }},

      {"physics.hbar", number_at([](SuiteConfig& c) -> double& { return c.units.hbar; })},
      {"physics.mass", number_at([](SuiteConfig& c) -> double& { return c.units.mass; })},
      {"physics.omega", number_at([](SuiteConfig& c) -> double& { return c.units.omega; })},
      {"physics.lambda", [](SuiteConfig& c, const Inputs& in) { c.lambdas = parse_list<double>(in); }},
      {"physics.field_mass", scalar(&SuiteConfig::field_mass)},
      {"physics.foliation",
       [](SuiteConfig& c, const Inputs& in) {
         const auto a = parse_array<double, 4>(in);
         c.foliation = Eigen::Vector4d(a[0], a[1], a[2], a[3]);
       }},

      {"fock.n_max", scalar(&SuiteConfig::n_max)},
      {"fock.coherent_n_max", scalar(&SuiteConfig::coherent_n_max)},
      {"fock.nparticle_modes", scalar(&SuiteConfig::nparticle_modes)},
      {"fock.allow_sparse", [](SuiteConfig& c, const Inputs& in) { c.allow_sparse = parse_bool(in); }},

      {"angular.span", scalar(&SuiteConfig::angular_span)},
      {"angular.refinements",
       [](SuiteConfig& c, const Inputs& in) { c.angular_refinements = parse_list<Index>(in); }},
      {"angular.eps_steps",
       [](SuiteConfig& c, const Inputs& in) { c.angular_eps_steps = parse_list<Index>(in); }},

      {"qft.grid", [](SuiteConfig& c, const Inputs& in) { c.qft_grid = parse_array<Index, 4>(in); }},
      {"qft.spacing", [](SuiteConfig& c, const Inputs& in) { c.qft_spacing = parse_array<double, 4>(in); }},
      {"qft.oracle_grid",
       [](SuiteConfig& c, const Inputs& in) { c.qft_oracle_grid = parse_array<Index, 4>(in); }},

      {"histories.levels", scalar(&SuiteConfig::history_levels)},
      {"histories.times", [](SuiteConfig& c, const Inputs& in) { c.history_times = parse_list<double>(in); }},

      {"heisenberg.fd_step", scalar(&SuiteConfig::fd_step)},

      {"tolerances.exact", number_at([](SuiteConfig& c) -> double& { return c.tol.exact; })},
      {"tolerances.field", number_at([](SuiteConfig& c) -> double& { return c.tol.field; })},
      {"tolerances.greens", number_at([](SuiteConfig& c) -> double& { return c.tol.greens; })},
      {"tolerances.projector", number_at([](SuiteConfig& c) -> double& { return c.tol.projector; })},
      {"tolerances.contrast", number_at([](SuiteConfig& c) -> double& { return c.tol.contrast; })},
      {"tolerances.fd_ratio", number_at([](SuiteConfig& c) -> double& { return c.tol.fd_ratio; })},

      {"run.seed", scalar(&SuiteConfig::seed)},
      {"run.samples", scalar(&SuiteConfig::samples)},
      {"run.coherent_samples", scalar(&SuiteConfig::coherent_samples)},

      {"debug.inject_central_term", scalar(&SuiteConfig::inject_central_term)},
  };
  return table;
}

}  // namespace

SuiteConfig parse_config(std::istream& in, const std::string& source) {
  SuiteConfig config;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw PreconditionError(source + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string key = item.fullname();
    const auto it = setters().find(key);
    if (it == setters().end()) throw PreconditionError(source + ": unknown config key '" + key + "'");
    try {
      it->second(config, item.inputs);
    } catch (const std::exception& e) {
      throw PreconditionError(source + ": config key '" + key + "': " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const std::exception& e) {
    throw PreconditionError(source + ": " + e.what());
  }
  return config;
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace hpo
