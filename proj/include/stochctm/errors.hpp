#pragma once

#include <stdexcept>
#include <string>

namespace stochctm {

// Bad call arguments (index out of range, dimension mismatch, non-positive step).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Ill-formed capacity process (reducible chain, absorbing mode).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario rejected by schema or by a modelling assumption.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A closed-form result was requested outside its structural preconditions.
class NotApplicableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// LP breakdown or another numerical failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stochctm
