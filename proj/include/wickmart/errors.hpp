#ifndef WICKMART_ERRORS_HPP
#define WICKMART_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wickmart {

// Bad user input (malformed polynomial, out-of-range flag, ...). CLI exit code 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure failed to converge or produce a usable result. CLI exit code 2.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wickmart

#endif
