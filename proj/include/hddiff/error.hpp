#pragma once

#include <stdexcept>
#include <string>

namespace hddiff {

// Bad input: malformed data, invalid configuration, precondition violations.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed on otherwise valid input.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hddiff
