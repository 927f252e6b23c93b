#pragma once

#include <stdexcept>
#include <string>

namespace xsplice {

// Invalid input: out-of-range wavelength, malformed spec, bad config value.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical procedure could not produce a result (no bracket, no convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xsplice
