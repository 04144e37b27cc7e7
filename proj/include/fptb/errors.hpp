#pragma once

#include <stdexcept>
#include <string>

namespace fptb {

// Bad run configuration (file contents, grids too coarse, missing keys).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure failed to converge or produced garbage.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A boundary failed its admissibility checks.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fptb
