#pragma once

#include <stdexcept>
#include <string>

namespace maskbench {

// All library failures surface as this type; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace maskbench
