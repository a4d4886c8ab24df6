#pragma once

#include <stdexcept>
#include <string>

namespace qsd {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Out-of-range or otherwise invalid argument to an operation.
struct ParameterError : Error {
  using Error::Error;
};

// Precondition on data (e.g. integrating against an empty measure).
struct PreconditionError : Error {
  using Error::Error;
};

// drift/diffusion returned a non-finite value; message names the point.
struct ModelEvalError : Error {
  using Error::Error;
};

// A path exceeded its step budget before absorption.
struct RunawayPathError : Error {
  using Error::Error;
};

// Chain restricted to the transient states is not irreducible, so the
// quasi-stationary distribution need not be unique.
struct ReducibleChainError : Error {
  using Error::Error;
};

// -Q is singular: the chain cannot be absorbed from some states.
struct NoAbsorptionError : Error {
  using Error::Error;
};

// Generic numerical failure (defective spectrum, quadrature stall, ...).
struct NumericalError : Error {
  using Error::Error;
};

// Requested horizon is unreachable (survival underflow, window past trace).
struct HorizonError : Error {
  using Error::Error;
};

// Adaptive ODE step size underflowed.
struct StiffnessError : Error {
  using Error::Error;
};

// Malformed chain specification file.
struct ChainFormatError : Error {
  using Error::Error;
};

// Config parse/validation failure; carries the key and line when known.
struct ConfigError : Error {
  ConfigError(const std::string& msg, std::string key_path = {}, int line_no = 0)
      : Error(msg), key(std::move(key_path)), line(line_no) {}
  std::string key;
  int line = 0;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace qsd
