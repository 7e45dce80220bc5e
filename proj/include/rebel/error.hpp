#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rebel {

/// Malformed or out-of-contract input (bad file, wrong dimensions, invalid costs).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weight or score left the representable range during training.
class NumericRangeError : public std::runtime_error {
 public:
  NumericRangeError(std::size_t round, const std::string& what)
      : std::runtime_error("round " + std::to_string(round) + ": " + what), round_(round) {}

  std::size_t round() const noexcept { return round_; }

 private:
  std::size_t round_;
};

/// Text-format parse failure; offset is the byte position in the input.
class ParseError : public InputError {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : InputError("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedVersionError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace rebel
