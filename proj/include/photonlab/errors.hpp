#pragma once

#include <stdexcept>
#include <string>

namespace photonlab {

// Malformed input: JSON syntax, missing fields, wrong types, unreadable files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A well-formed value that violates a domain invariant (rate <= 0, p > 1, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accidental-coincidence normalization is undefined (zero rate or duration).
class NormalizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough data to run an estimator (e.g. fewer than three fringes).
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace photonlab
