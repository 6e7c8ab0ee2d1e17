#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace nru {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or an argument outside an operation's domain.
class DomainError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// File could not be read or written; the message names the path.
class IoError : public Error {
public:
  using Error::Error;
};

class InfeasibleError : public Error {
public:
  using Error::Error;
};

// Iterative solver gave up; carries the last residuals it saw.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::array<double, 4> residuals, int iterations)
      : Error(what), residuals_(residuals), iterations_(iterations) {}
  const std::array<double, 4>& residuals() const { return residuals_; }
  int iterations() const { return iterations_; }

private:
  std::array<double, 4> residuals_;
  int iterations_;
};

}  // namespace nru
