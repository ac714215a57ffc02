#pragma once

#include <stdexcept>

namespace virevo {

/// Invalid parameters or arguments supplied by a caller. The CLI maps it
/// to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace virevo
