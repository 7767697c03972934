#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tailray {

// Invalid argument or parameter outside its admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical procedure failed to deliver the requested accuracy.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too few threshold exceedances to fit a tail model.
class InsufficientDataError : public NumericError {
 public:
  InsufficientDataError(const std::string& what, std::size_t available)
      : NumericError(what), available_(available) {}

  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t available_;
};

// Derivative requested at a point where the function has a kink.
class NonDifferentiableError : public DomainError {
 public:
  NonDifferentiableError(const std::string& what, double at)
      : DomainError(what), at_(at) {}

  double at() const noexcept { return at_; }

 private:
  double at_;
};

}  // namespace tailray
