#pragma once

#include <stdexcept>
#include <string>

namespace pdsim {

/// Raised for any contract violation or malformed input. The message is
/// meant for humans and always names the offending index, key or offset.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdsim
