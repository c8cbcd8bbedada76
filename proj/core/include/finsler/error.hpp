#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Non-finite or out-of-domain intermediate during evaluation
/// (sqrt of a negative number, log of zero, division by zero, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A sampled point lies outside the admissible cone of a metric
/// (L <= 0, indefinite or singular fundamental tensor, ||b||_a >= 1, ...).
class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is the 0-based character offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace finsler
