#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fds {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Argument outside the domain of a formula (negative current, non-finite input, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A denominator or log argument hit zero (or crossed it).
class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed trace / report input.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration (scenario files, parameter overrides).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite state or derivative during integration.
class IntegrationFault : public std::runtime_error {
 public:
  explicit IntegrationFault(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fds
