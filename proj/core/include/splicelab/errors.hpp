#pragma once

#include <stdexcept>
#include <string>

namespace splicelab {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class PatchLargerThanImage : public Error {
public:
  using Error::Error;
};

class OutOfRange : public Error {
public:
  using Error::Error;
};

/// Thrown when an image has no authentic patch to derive a target from.
class AttackInfeasible : public Error {
public:
  using Error::Error;
};

class NumericalFailure : public Error {
public:
  using Error::Error;
};

class UndefinedMetric : public Error {
public:
  using Error::Error;
};

/// Thrown when a splice spec cannot be satisfied after regeneration attempts.
class InfeasibleSpec : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace splicelab
