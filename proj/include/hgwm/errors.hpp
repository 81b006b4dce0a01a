#pragma once

#include <stdexcept>
#include <string>

namespace hgwm {

/// Violated precondition or physically invalid input (bad sigma, orthogonal
/// selections, grid too small, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical procedure failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hgwm
