#pragma once

#include <stdexcept>
#include <string>

namespace dualgem {

// Invalid or inconsistent scenario input (bad config file, out-of-range
// parameter, violated operating-point precondition). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Integration blew up or produced non-finite values. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dualgem
