#pragma once

#include <istream>
#include <string>

#include "hpo/suites.hpp"

namespace hpo {

/// Reads a sectioned key-value config ([lattice], [physics], [fock], [angular],
/// [qft], [histories], [heisenberg], [tolerances], [run], [debug]). Keys that are
/// absent keep their defaults; unknown sections or keys and malformed values
/// throw PreconditionError. The result is validated.
SuiteConfig parse_config(std::istream& in, const std::string& source = "<config>");
SuiteConfig load_config(const std::string& path);

}  // namespace hpo
