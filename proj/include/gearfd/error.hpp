#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gearfd {

/// Violated precondition on an argument or on the content of a dataset.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A binary file does not match its declared layout.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Training or evaluation produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fault signature could not be formed because the residual is identically zero.
class DegenerateSignatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gearfd
