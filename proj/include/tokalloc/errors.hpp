#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tokalloc {

// A device must transmit (S^max > 0) but its link has zero rate, or an
// initial allocation violates the budget constraints.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Brute-force oracle asked to enumerate more points than it is allowed to.
class OracleSizeError : public std::runtime_error {
 public:
  OracleSizeError(const std::string& what, double estimated_points)
      : std::runtime_error(what), estimated_points_(estimated_points) {}
  double estimated_points() const noexcept { return estimated_points_; }

 private:
  double estimated_points_;
};

// Invalid or missing configuration input. `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace tokalloc
