#ifndef DNLS_ERRORS_HPP
#define DNLS_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dnls {

/// Bad input: malformed expressions, inconsistent configuration, violated
/// preconditions.  CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Syntax error while parsing a nonlinearity expression.  Carries the byte
/// offset of the offending token in the source string.
class ParseError : public ValidationError {
public:
  ParseError(const std::string& what, std::size_t position)
      : ValidationError(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/// Runtime numerical failure: non-finite values, blow-up guards, quadrature
/// that cannot reach tolerance.  CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dnls

#endif
