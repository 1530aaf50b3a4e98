#pragma once

#include <stdexcept>
#include <string>

namespace chaoscale {

/// An argument lies outside the domain an operation is defined on.
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A computation produced a non-finite or otherwise unusable value.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unreadable input (JSON, files, unknown config keys).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

}  // namespace detail
}  // namespace chaoscale
