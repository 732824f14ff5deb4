#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opfam {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an argument outside the documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input matrix fails the hermiticity tolerance.
class NotHermitian : public Error {
 public:
  NotHermitian(double deviation, std::ptrdiff_t row, std::ptrdiff_t col, double tolerance);

  double deviation() const noexcept { return deviation_; }
  std::ptrdiff_t row() const noexcept { return row_; }
  std::ptrdiff_t col() const noexcept { return col_; }

 private:
  double deviation_;
  std::ptrdiff_t row_;
  std::ptrdiff_t col_;
};

/// A window endpoint sits on (or within tolerance of) the spectrum.
class EdgeOnSpectrum : public Error {
 public:
  EdgeOnSpectrum(double margin, double tolerance, std::ptrdiff_t grid_index = -1);

  double margin() const noexcept { return margin_; }
  /// Grid index where the edge was hit, or -1 for a single operator.
  std::ptrdiff_t grid_index() const noexcept { return grid_index_; }

 private:
  double margin_;
  std::ptrdiff_t grid_index_;
};

/// No admissible window level exists below the truncation ceiling.
class NoGap : public Error {
 public:
  NoGap(std::size_t grid_index, double lower_bound, double ceiling);

  std::size_t grid_index() const noexcept { return grid_index_; }
  double lower_bound() const noexcept { return lower_bound_; }
  double ceiling() const noexcept { return ceiling_; }

 private:
  std::size_t grid_index_;
  double lower_bound_;
  double ceiling_;
};

/// A family parameter lands on a singular point of the model.
class SingularParameter : public Error {
 public:
  explicit SingularParameter(double x);
  double x() const noexcept { return x_; }

 private:
  double x_;
};

/// A quantitative inequality of a continuity certificate does not hold.
class BoundViolated : public Error {
 public:
  BoundViolated(std::string inequality, double value, double bound);

  const std::string& inequality() const noexcept { return inequality_; }
  double value() const noexcept { return value_; }
  double bound() const noexcept { return bound_; }

 private:
  std::string inequality_;
  double value_;
  double bound_;
};

/// No level makes the positive spectral projections vary within the cap.
class StrictAdaptednessFailed : public Error {
 public:
  StrictAdaptednessFailed(std::size_t x_index, double best_modulus, double cap);

  std::size_t x_index() const noexcept { return x_index_; }
  double best_modulus() const noexcept { return best_modulus_; }
  double cap() const noexcept { return cap_; }

 private:
  std::size_t x_index_;
  double best_modulus_;
  double cap_;
};

/// Zero lies on the spectrum at a path endpoint.
class EndpointOnSpectrum : public Error {
 public:
  EndpointOnSpectrum(std::size_t grid_index, double margin);
  std::size_t grid_index() const noexcept { return grid_index_; }

 private:
  std::size_t grid_index_;
};

/// Eigenvalue branches cannot be matched between two adjacent grid points.
class AmbiguousMatching : public Error {
 public:
  AmbiguousMatching(std::size_t left_index, double movement, double bound);
  std::size_t left_index() const noexcept { return left_index_; }
  double movement() const noexcept { return movement_; }
  double bound() const noexcept { return bound_; }

 private:
  std::size_t left_index_;
  double movement_;
  double bound_;
};

/// A grid edge admits no common adapted level.
class PartitionFailed : public Error {
 public:
  explicit PartitionFailed(std::size_t left_index);
  std::size_t left_index() const noexcept { return left_index_; }

 private:
  std::size_t left_index_;
};

}  // namespace opfam
