#pragma once

// Spectral calculus for finite Hermitian matrices: decomposition, spectral
// projections onto real windows, the bounded transform t / sqrt(1 + t^2),
// the resolvent at i and operator norms.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "opfam/errors.hpp"

namespace opfam {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical tolerances shared by all certificates.
struct Tolerances {
  double hermiticity = 1e-10;     ///< relative to the max-abs entry
  double unitarity = 1e-9;
  double projection = 1e-9;
  double reconstruction = 1e-9;
  double edge = 1e-8;             ///< minimal distance of a window edge to the spectrum
};

/// A finite self-adjoint operator. Stored exactly Hermitian.
class HermitianOperator {
 public:
  /// Validates hermiticity within `tol.hermiticity * max|a_ij|` and
  /// stores the symmetrized matrix (A + A*) / 2.
  explicit HermitianOperator(const Matrix& entries, const Tolerances& tol = {});

  static HermitianOperator diagonal(const std::vector<double>& values);
  static HermitianOperator zero(Index dim);
  static HermitianOperator identity(Index dim);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }

  HermitianOperator operator-() const;
  /// A - shift * I
  HermitianOperator shifted(double shift) const;

 private:
  Matrix m_;
};

/// Eigenvalues ascending with an orthonormal eigenbasis in the columns.
struct SpectralDecomposition {
  RealVector eigenvalues;
  Matrix eigenvectors;

  Index dim() const noexcept { return eigenvalues.size(); }

  /// V diag(f(lambda)) V*.
  Matrix apply(const std::function<Complex(double)>& f) const;
  /// V diag(f(lambda)) V* restricted to the eigenvalues accepted by `select`.
  Matrix apply(const std::function<Complex(double)>& f,
               const std::function<bool(double)>& select) const;
  /// Same eigenvectors, eigenvalues mapped through an increasing function.
  SpectralDecomposition mapped(const std::function<double(double)>& increasing) const;
  double max_abs_eigenvalue() const;
};

/// An interval of the real line; infinite endpoints are allowed.
struct RealWindow {
  double lo;
  double hi;
  bool lo_closed = true;
  bool hi_closed = true;

  RealWindow(double lo, double hi, bool lo_closed = true, bool hi_closed = true);

  static RealWindow closed(double lo, double hi) { return {lo, hi, true, true}; }
  static RealWindow open(double lo, double hi) { return {lo, hi, false, false}; }
  /// [lo, +inf)
  static RealWindow at_least(double lo);
  /// (-inf, hi]
  static RealWindow at_most(double hi);
  /// [-level, level]
  static RealWindow symmetric(double level) { return closed(-level, level); }

  bool contains(double t) const noexcept;
  /// Distance from t to the nearest finite endpoint (infinity if none).
  double edge_distance(double t) const noexcept;
};

/// Throws NotHermitian if the decomposition cannot be formed.
SpectralDecomposition decompose(const HermitianOperator& a);

/// Smallest distance between an eigenvalue and a finite window endpoint.
double window_margin(const RealVector& eigenvalues, const RealWindow& window);
/// Number of eigenvalues inside the window (no edge check).
int window_rank(const RealVector& eigenvalues, const RealWindow& window);

struct SpectralProjection {
  Matrix projector;
  int rank = 0;
  double margin = std::numeric_limits<double>::infinity();
};

/// Orthogonal projection onto the eigenvectors with eigenvalue in `window`.
/// Throws EdgeOnSpectrum when the margin falls below `tol.edge`.
SpectralProjection spectral_projection(const SpectralDecomposition& d, const RealWindow& window,
                                       const Tolerances& tol = {});
SpectralProjection spectral_projection(const HermitianOperator& a, const RealWindow& window,
                                       const Tolerances& tol = {});

/// gamma(t) = t (1 + t^2)^{-1/2}
double bounded_transform(double t) noexcept;
/// Inverse of gamma on (-1, 1).
double inverse_bounded_transform(double s);

HermitianOperator bounded_transform(const HermitianOperator& a);
Matrix bounded_transform(const SpectralDecomposition& d);

/// (A + i)^{-1}
Matrix resolvent_at_i(const HermitianOperator& a);
Matrix resolvent_at_i(const SpectralDecomposition& d);

/// Largest singular value. Hermitian input goes through the eigensolver.
double operator_norm(const Matrix& m);
/// Norm of a matrix known to be Hermitian (only the lower triangle is read).
double hermitian_norm(const Matrix& m);

/// ||V diag(lambda) V* - A|| in operator norm.
double reconstruction_error(const HermitianOperator& a, const SpectralDecomposition& d);
/// ||V* V - I|| in operator norm.
double unitarity_error(const SpectralDecomposition& d);

}  // namespace opfam
