#include "opfam/spectral_core.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace opfam {

HermitianOperator::HermitianOperator(const Matrix& entries, const Tolerances& tol) {
  if (entries.rows() < 1 || entries.rows() != entries.cols()) {
    throw InvalidArgument("Hermitian operator needs a non-empty square matrix");
  }
  const double scale = entries.cwiseAbs().maxCoeff();
  const double allowed = tol.hermiticity * scale;
  double worst = 0.0;
  Index worst_r = 0, worst_c = 0;
  for (Index c = 0; c < entries.cols(); ++c) {
    for (Index r = c; r < entries.rows(); ++r) {
      const double dev = std::abs(entries(r, c) - std::conj(entries(c, r)));
      if (dev > worst) {
        worst = dev;
        worst_r = r;
        worst_c = c;
      }
    }
  }
  if (worst > allowed) {
    throw NotHermitian(worst, worst_r, worst_c, allowed);
  }
  m_ = (entries + entries.adjoint()) / 2.0;
  // Force the diagonal real and the two triangles exactly conjugate.
  for (Index c = 0; c < m_.cols(); ++c) {
    m_(c, c) = Complex(m_(c, c).real(), 0.0);
    for (Index r = c + 1; r < m_.rows(); ++r) m_(c, r) = std::conj(m_(r, c));
  }
}

HermitianOperator HermitianOperator::diagonal(const std::vector<double>& values) {
  Matrix m = Matrix::Zero(static_cast<Index>(values.size()), static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    m(static_cast<Index>(i), static_cast<Index>(i)) = values[i];
  }
  return HermitianOperator(m);
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return HermitianOperator(Matrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return HermitianOperator(Matrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::operator-() const {
  return HermitianOperator(Matrix(-m_));
}

HermitianOperator HermitianOperator::shifted(double shift) const {
  Matrix m = m_;
  m.diagonal().array() -= shift;
  return HermitianOperator(m);
}

Matrix SpectralDecomposition::apply(const std::function<Complex(double)>& f) const {
  return apply(f, [](double) { return true; });
}

Matrix SpectralDecomposition::apply(const std::function<Complex(double)>& f,
                                    const std::function<bool(double)>& select) const {
  const Index n = dim();
  std::vector<Index> cols;
  for (Index k = 0; k < n; ++k) {
    if (select(eigenvalues(k))) cols.push_back(k);
  }
  if (cols.empty()) return Matrix::Zero(n, n);
  Matrix v(n, static_cast<Index>(cols.size()));
  Eigen::VectorXcd w(static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    v.col(static_cast<Index>(j)) = eigenvectors.col(cols[j]);
    w(static_cast<Index>(j)) = f(eigenvalues(cols[j]));
  }
  return v * w.asDiagonal() * v.adjoint();
}

SpectralDecomposition SpectralDecomposition::mapped(
    const std::function<double(double)>& increasing) const {
  SpectralDecomposition out{eigenvalues, eigenvectors};
  for (Index k = 0; k < out.eigenvalues.size(); ++k) {
    out.eigenvalues(k) = increasing(eigenvalues(k));
  }
  return out;
}

double SpectralDecomposition::max_abs_eigenvalue() const {
  return eigenvalues.cwiseAbs().maxCoeff();
}

RealWindow::RealWindow(double lo_, double hi_, bool lo_closed_, bool hi_closed_)
    : lo(lo_), hi(hi_), lo_closed(lo_closed_), hi_closed(hi_closed_) {
  if (!(lo <= hi)) throw InvalidArgument("window needs lo <= hi");
}

RealWindow RealWindow::at_least(double lo) {
  return {lo, std::numeric_limits<double>::infinity(), true, false};
}

RealWindow RealWindow::at_most(double hi) {
  return {-std::numeric_limits<double>::infinity(), hi, false, true};
}

bool RealWindow::contains(double t) const noexcept {
  const bool above = lo_closed ? t >= lo : t > lo;
  const bool below = hi_closed ? t <= hi : t < hi;
  return above && below;
}

double RealWindow::edge_distance(double t) const noexcept {
  double d = std::numeric_limits<double>::infinity();
  if (std::isfinite(lo)) d = std::min(d, std::abs(t - lo));
  if (std::isfinite(hi)) d = std::min(d, std::abs(t - hi));
  return d;
}

SpectralDecomposition decompose(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error("Hermitian eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double window_margin(const RealVector& eigenvalues, const RealWindow& window) {
  double m = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < eigenvalues.size(); ++k) {
    m = std::min(m, window.edge_distance(eigenvalues(k)));
  }
  return m;
}

int window_rank(const RealVector& eigenvalues, const RealWindow& window) {
  int r = 0;
  for (Index k = 0; k < eigenvalues.size(); ++k) {
    if (window.contains(eigenvalues(k))) ++r;
  }
  return r;
}

SpectralProjection spectral_projection(const SpectralDecomposition& d, const RealWindow& window,
                                       const Tolerances& tol) {
  SpectralProjection out;
  out.margin = window_margin(d.eigenvalues, window);
  if (out.margin < tol.edge) throw EdgeOnSpectrum(out.margin, tol.edge);
  out.rank = window_rank(d.eigenvalues, window);
  out.projector = d.apply([](double) { return Complex(1.0); },
                          [&](double t) { return window.contains(t); });
  return out;
}

SpectralProjection spectral_projection(const HermitianOperator& a, const RealWindow& window,
                                       const Tolerances& tol) {
  return spectral_projection(decompose(a), window, tol);
}

double bounded_transform(double t) noexcept {
  if (std::isinf(t)) return t > 0 ? 1.0 : -1.0;
  return t / std::sqrt(1.0 + t * t);
}

double inverse_bounded_transform(double s) {
  if (!(s > -1.0 && s < 1.0)) throw InvalidArgument("inverse bounded transform needs |s| < 1");
  return s / std::sqrt(1.0 - s * s);
}

Matrix bounded_transform(const SpectralDecomposition& d) {
  return d.apply([](double t) { return Complex(bounded_transform(t)); });
}

HermitianOperator bounded_transform(const HermitianOperator& a) {
  return HermitianOperator(bounded_transform(decompose(a)));
}

Matrix resolvent_at_i(const SpectralDecomposition& d) {
  return d.apply([](double t) { return 1.0 / Complex(t, 1.0); });
}

Matrix resolvent_at_i(const HermitianOperator& a) { return resolvent_at_i(decompose(a)); }

double hermitian_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const double skew = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (skew <= 1e-14 * scale) {
    return hermitian_norm((m + m.adjoint()) / 2.0);
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double reconstruction_error(const HermitianOperator& a, const SpectralDecomposition& d) {
  const Matrix rebuilt = d.eigenvectors * d.eigenvalues.cast<Complex>().asDiagonal() *
                         d.eigenvectors.adjoint();
  return operator_norm(rebuilt - a.matrix());
}

double unitarity_error(const SpectralDecomposition& d) {
  const Index n = d.dim();
  return operator_norm(d.eigenvectors.adjoint() * d.eigenvectors - Matrix::Identity(n, n));
}

}  // namespace opfam
