#ifndef MALAB_ERRORS_HPP
#define MALAB_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace malab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input (bad parameters, violated preconditions).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// Polygon that fails the convexity test at a specific vertex.
class NonConvexPolygon : public InvalidArgument
{
public:
  NonConvexPolygon(std::size_t vertex, const std::string& what)
    : InvalidArgument(what), vertex_(vertex)
  {}
  std::size_t vertex() const { return vertex_; }

private:
  std::size_t vertex_;
};

/// Nonlinear or linear solver failure.
class SolverError : public Error
{
public:
  SolverError(const std::string& what, double last_residual)
    : Error(what), last_residual_(last_residual)
  {}
  double last_residual() const { return last_residual_; }

private:
  double last_residual_;
};

} // namespace malab

#endif
