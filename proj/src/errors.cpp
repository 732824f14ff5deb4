#include "opfam/errors.hpp"

#include <cstdio>

namespace opfam {
namespace {

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace

NotHermitian::NotHermitian(double deviation, std::ptrdiff_t row, std::ptrdiff_t col,
                           double tolerance)
    : Error(format("matrix is not Hermitian: |a(%td,%td) - conj(a(%td,%td))| = %.3e exceeds %.3e",
                   row, col, col, row, deviation, tolerance)),
      deviation_(deviation),
      row_(row),
      col_(col) {}

EdgeOnSpectrum::EdgeOnSpectrum(double margin, double tolerance, std::ptrdiff_t grid_index)
    : Error(grid_index >= 0
                ? format("window edge on spectrum at grid index %td: margin %.3e < %.3e",
                         grid_index, margin, tolerance)
                : format("window edge on spectrum: margin %.3e < %.3e", margin, tolerance)),
      margin_(margin),
      grid_index_(grid_index) {}

NoGap::NoGap(std::size_t grid_index, double lower_bound, double ceiling)
    : Error(format("no admissible level above %.6g below ceiling %.6g at grid index %zu "
                   "(truncation too small for this level)",
                   lower_bound, ceiling, grid_index)),
      grid_index_(grid_index),
      lower_bound_(lower_bound),
      ceiling_(ceiling) {}

SingularParameter::SingularParameter(double x)
    : Error(format("grid point x = %.17g is a pole of the family", x)), x_(x) {}

BoundViolated::BoundViolated(std::string inequality, double value, double bound)
    : Error(format("bound violated: %s = %.6e is not below %.6e", inequality.c_str(), value, bound)),
      inequality_(std::move(inequality)),
      value_(value),
      bound_(bound) {}

StrictAdaptednessFailed::StrictAdaptednessFailed(std::size_t x_index, double best_modulus,
                                                 double cap)
    : Error(format("no strictly adapted level at grid index %zu: best projection modulus %.6g "
                   "is not below cap %.6g",
                   x_index, best_modulus, cap)),
      x_index_(x_index),
      best_modulus_(best_modulus),
      cap_(cap) {}

EndpointOnSpectrum::EndpointOnSpectrum(std::size_t grid_index, double margin)
    : Error(format("zero is on the spectrum at endpoint index %zu (margin %.3e)", grid_index,
                   margin)),
      grid_index_(grid_index) {}

AmbiguousMatching::AmbiguousMatching(std::size_t left_index, double movement, double bound)
    : Error(format("ambiguous branch matching on edge (%zu, %zu): movement %.6g exceeds %.6g",
                   left_index, left_index + 1, movement, bound)),
      left_index_(left_index),
      movement_(movement),
      bound_(bound) {}

PartitionFailed::PartitionFailed(std::size_t left_index)
    : Error(format("no common adapted level on grid edge (%zu, %zu); grid too coarse",
                   left_index, left_index + 1)),
      left_index_(left_index) {}

}  // namespace opfam
