#pragma once

#include <stdexcept>
#include <string>

namespace pbound {

/// Malformed input: unknown symbols, parse errors, violated preconditions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured resource limit (words, states, components) was exceeded.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A self-check failed. Seeing one of these means a bug in this library.
class SoundnessError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pbound
