#ifndef XLAYER_ERROR_HPP_
#define XLAYER_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace xlayer {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed configuration, out-of-domain argument, dimension
// mismatch.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Random placement could not satisfy the per-group occupancy or link
// connectivity requirements within the attempt budget.
class InfeasibleDensity : public Error {
 public:
  using Error::Error;
};

// A user node ended up without an outgoing candidate link.
class DisconnectedNode : public Error {
 public:
  DisconnectedNode(int node, const std::string& what) : Error(what), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

enum class SolverFailure { kInfeasible, kUnbounded, kNotConverged, kNumerical };

const char* to_string(SolverFailure failure);

class SolverError : public Error {
 public:
  SolverError(SolverFailure kind, const std::string& what) : Error(what), kind_(kind) {}
  SolverFailure kind() const { return kind_; }

 private:
  SolverFailure kind_;
};

}  // namespace xlayer

#endif  // XLAYER_ERROR_HPP_
