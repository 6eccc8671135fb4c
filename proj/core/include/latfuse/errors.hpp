#pragma once

#include <stdexcept>
#include <string>

namespace latfuse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generator is singular (or numerically so), or a transform collapsed.
class DegenerateLatticeError : public Error {
 public:
  using Error::Error;
};

class UnknownLatticeError : public Error {
 public:
  using Error::Error;
};

/// Malformed or version-incompatible catalog, lattice or checkpoint file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Training loss blew past the divergence guard.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace latfuse
