#pragma once

#include <stdexcept>
#include <string>

namespace hpo {

/// Operands live on different lattices / mode spaces, or sizes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An input violates a documented precondition (non-projector, complex
/// weight where a real one is required, non-normalized foliation, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A function of an operator is undefined on part of its spectrum.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SingularOperatorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedFeature : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Truncation or dense-size ceiling exceeded.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace hpo
