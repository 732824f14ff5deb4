#include "opfam/family_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "parallel.hpp"

namespace opfam {

using nlohmann::json;

ParameterGrid::ParameterGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw InvalidArgument("parameter grid needs at least two points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw InvalidArgument("parameter grid has a non-finite point");
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw InvalidArgument("parameter grid must be strictly increasing");
    }
  }
}

ParameterGrid ParameterGrid::linspace(double start, double end, std::size_t count) {
  if (count < 2) throw InvalidArgument("linspace needs at least two points");
  std::vector<double> p(count);
  const double step = (end - start) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) p[i] = start + step * static_cast<double>(i);
  p.back() = end;
  return ParameterGrid(std::move(p));
}

ParameterGrid ParameterGrid::excluding(double start, double end, std::size_t count, double center,
                                       double half_width) {
  if (count < 4) throw InvalidArgument("excluding grid needs at least four points");
  if (!(start < center - half_width && center + half_width < end)) {
    throw InvalidArgument("excluded window must lie inside the grid interval");
  }
  const std::size_t left = count / 2;
  const std::size_t right = count - left;
  auto a = linspace(start, center - half_width, left).points();
  const auto b = linspace(center + half_width, end, right).points();
  a.insert(a.end(), b.begin(), b.end());
  return ParameterGrid(std::move(a));
}

FamilySample::FamilySample(ParameterGrid grid, std::vector<HermitianOperator> operators,
                           int threads)
    : grid_(std::move(grid)), operators_(std::move(operators)) {
  if (operators_.size() != grid_.size()) {
    throw InvalidArgument("family sample needs one operator per grid point");
  }
  for (const auto& op : operators_) {
    if (op.dim() != operators_.front().dim()) {
      throw InvalidArgument("family sample operators must share one dimension");
    }
  }
  spectra_.resize(operators_.size());
  detail::parallel_for(operators_.size(), threads,
                       [&](std::size_t i) { spectra_[i] = decompose(operators_[i]); });
}

FamilySample::FamilySample(ParameterGrid grid, std::vector<HermitianOperator> operators,
                           std::vector<SpectralDecomposition> spectra)
    : grid_(std::move(grid)), operators_(std::move(operators)), spectra_(std::move(spectra)) {}

FamilySample FamilySample::shifted(double shift) const {
  std::vector<HermitianOperator> ops;
  std::vector<SpectralDecomposition> spectra;
  ops.reserve(size());
  spectra.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    ops.push_back(operators_[i].shifted(shift));
    spectra.push_back(spectra_[i].mapped([shift](double t) { return t - shift; }));
  }
  return FamilySample(grid_, std::move(ops), std::move(spectra));
}

FamilySample FamilySample::bounded_transformed() const {
  std::vector<HermitianOperator> ops;
  std::vector<SpectralDecomposition> spectra;
  ops.reserve(size());
  spectra.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    ops.emplace_back(bounded_transform(spectra_[i]));
    spectra.push_back(
        spectra_[i].mapped([](double t) { return opfam::bounded_transform(t); }));
  }
  return FamilySample(grid_, std::move(ops), std::move(spectra));
}

FamilySample FamilySample::slice(GridRange range) const {
  if (range.hi >= size() || range.lo >= range.hi) {
    throw InvalidArgument("slice needs lo < hi inside the grid");
  }
  const auto first = static_cast<std::ptrdiff_t>(range.lo);
  const auto last = static_cast<std::ptrdiff_t>(range.hi) + 1;
  return FamilySample(
      ParameterGrid({grid_.points().begin() + first, grid_.points().begin() + last}),
      {operators_.begin() + first, operators_.begin() + last},
      {spectra_.begin() + first, spectra_.begin() + last});
}

FamilySample FamilySample::reversed() const {
  std::vector<double> x(grid_.points().rbegin(), grid_.points().rend());
  for (auto& v : x) v = -v;
  return FamilySample(ParameterGrid(std::move(x)), {operators_.rbegin(), operators_.rend()},
                      {spectra_.rbegin(), spectra_.rend()});
}

FamilySample concatenate(const FamilySample& first, const FamilySample& second) {
  if (first.dim() != second.dim()) throw InvalidArgument("concatenated paths differ in dimension");
  const double junction = first.x(first.size() - 1);
  std::size_t skip = 0;
  if (second.x(0) == junction) {
    if (second.op(0).matrix() != first.op(first.size() - 1).matrix()) {
      throw InvalidArgument("paths share a junction point but disagree on its operator");
    }
    skip = 1;
  } else if (!(second.x(0) > junction)) {
    throw InvalidArgument("second path must start at or after the end of the first");
  }
  std::vector<double> x = first.grid().points();
  std::vector<HermitianOperator> ops;
  for (std::size_t i = 0; i < first.size(); ++i) ops.push_back(first.op(i));
  for (std::size_t i = skip; i < second.size(); ++i) {
    x.push_back(second.x(i));
    ops.push_back(second.op(i));
  }
  // Decompositions are recomputed; this keeps the constructor contract simple.
  return FamilySample(ParameterGrid(std::move(x)), std::move(ops));
}

namespace {

constexpr std::pair<FamilyKind, std::string_view> kKindNames[] = {
    {FamilyKind::DiracCircle, "dirac_circle"},
    {FamilyKind::HarmonicPerturbed, "harmonic_perturbed"},
    {FamilyKind::TangentBlowup, "tangent_blowup"},
    {FamilyKind::LinearCrossing, "linear_crossing"},
    {FamilyKind::RandomCrossings, "random_crossings"},
    {FamilyKind::MatrixPathFile, "matrix_path_file"},
};

// Uniform in [-1, 1) from the top 53 bits; identical on every platform.
double signed_unit(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

Matrix random_hermitian(std::mt19937_64& rng, Index n) {
  Matrix h(n, n);
  const double diag_scale = std::sqrt(3.0 / static_cast<double>(n));
  const double off_scale = std::sqrt(3.0 / (2.0 * static_cast<double>(n)));
  for (Index c = 0; c < n; ++c) {
    h(c, c) = diag_scale * signed_unit(rng);
    for (Index r = c + 1; r < n; ++r) {
      const double re = signed_unit(rng);
      const double im = signed_unit(rng);
      h(r, c) = off_scale * Complex(re, im);
      h(c, r) = std::conj(h(r, c));
    }
  }
  return h;
}

bool near_pole(double x) {
  // tan(pi x) has poles at x = k + 1/2.
  const double frac = x - std::floor(x);
  return std::abs(frac - 0.5) < 1e-9;
}

std::vector<double> linear_crossing_padding(int dim) {
  std::vector<double> pad;
  for (int k = 0; static_cast<int>(pad.size()) < dim - 1; ++k) {
    pad.push_back(2.0 + k);
    if (static_cast<int>(pad.size()) < dim - 1) pad.push_back(-(2.0 + k));
  }
  return pad;
}

}  // namespace

std::string_view to_string(FamilyKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<FamilyKind> parse_family_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

int FamilySpec::dimension() const {
  switch (kind) {
    case FamilyKind::DiracCircle:
      return 2 * modes + 1;
    case FamilyKind::TangentBlowup:
      return 1 + static_cast<int>(padding.size());
    case FamilyKind::MatrixPathFile:
      return truncate_to.value_or(0);
    default:
      return dim;
  }
}

FamilySpec FamilySpec::with_dimension(int d) const {
  FamilySpec out = *this;
  switch (kind) {
    case FamilyKind::DiracCircle:
      if (d < 3 || d % 2 == 0) throw InvalidArgument("dirac_circle dimension must be odd and >= 3");
      out.modes = (d - 1) / 2;
      break;
    case FamilyKind::TangentBlowup:
      if (d != dimension()) throw InvalidArgument("tangent_blowup dimension is fixed by its padding");
      break;
    case FamilyKind::MatrixPathFile:
      out.truncate_to = d;
      break;
    default:
      out.dim = d;
  }
  out.validate();
  return out;
}

void FamilySpec::validate() const {
  switch (kind) {
    case FamilyKind::DiracCircle:
      if (modes < 1) throw InvalidArgument("dirac_circle needs modes >= 1");
      break;
    case FamilyKind::HarmonicPerturbed:
    case FamilyKind::LinearCrossing:
    case FamilyKind::RandomCrossings:
      if (dim < 1) throw InvalidArgument("family dimension must be >= 1");
      break;
    case FamilyKind::TangentBlowup:
      for (double p : padding) {
        if (!std::isfinite(p)) throw InvalidArgument("tangent_blowup padding must be finite");
      }
      break;
    case FamilyKind::MatrixPathFile:
      if (path.empty()) throw InvalidArgument("matrix_path_file needs a path");
      if (truncate_to && *truncate_to < 1) throw InvalidArgument("truncation must be >= 1");
      break;
  }
}

FamilySample sample(const FamilySpec& spec, const std::optional<ParameterGrid>& grid,
                    int threads) {
  spec.validate();
  if (spec.kind == FamilyKind::MatrixPathFile) {
    FamilySample loaded = load_matrix_path(spec.path, threads);
    if (grid && grid->points() != loaded.grid().points()) {
      throw InvalidArgument("configured grid does not match the grid stored in the matrix file");
    }
    if (!spec.truncate_to || *spec.truncate_to == loaded.dim()) return loaded;
    const Index d = *spec.truncate_to;
    if (d > loaded.dim()) throw InvalidArgument("truncation exceeds the stored dimension");
    std::vector<HermitianOperator> ops;
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      ops.emplace_back(Matrix(loaded.op(i).matrix().topLeftCorner(d, d)));
    }
    return FamilySample(loaded.grid(), std::move(ops), threads);
  }
  if (!grid) throw InvalidArgument("analytic families need a parameter grid");

  std::vector<HermitianOperator> ops;
  ops.reserve(grid->size());
  const Index n = spec.dimension();
  Matrix h0, h1;
  if (spec.kind == FamilyKind::RandomCrossings) {
    std::mt19937_64 rng(spec.seed);
    h0 = random_hermitian(rng, n);
    h1 = random_hermitian(rng, n);
  }
  for (double x : grid->points()) {
    switch (spec.kind) {
      case FamilyKind::DiracCircle: {
        std::vector<double> d;
        for (int k = -spec.modes; k <= spec.modes; ++k) d.push_back(k + spec.flux(x));
        ops.push_back(HermitianOperator::diagonal(d));
        break;
      }
      case FamilyKind::HarmonicPerturbed: {
        Matrix m = Matrix::Zero(n, n);
        const double g = spec.coupling(x);
        for (Index k = 0; k < n; ++k) {
          m(k, k) = static_cast<double>(k) + 0.5 - static_cast<double>(n) / 2.0;
          if (k + 1 < n) {
            m(k, k + 1) = g;
            m(k + 1, k) = g;
          }
        }
        ops.emplace_back(m);
        break;
      }
      case FamilyKind::TangentBlowup: {
        if (near_pole(x)) throw SingularParameter(x);
        std::vector<double> d{std::tan(std::numbers::pi * x)};
        d.insert(d.end(), spec.padding.begin(), spec.padding.end());
        ops.push_back(HermitianOperator::diagonal(d));
        break;
      }
      case FamilyKind::LinearCrossing: {
        std::vector<double> d{x - 0.5};
        const auto pad = linear_crossing_padding(static_cast<int>(n));
        d.insert(d.end(), pad.begin(), pad.end());
        ops.push_back(HermitianOperator::diagonal(d));
        break;
      }
      case FamilyKind::RandomCrossings: {
        const double t = std::numbers::pi * x / 2.0;
        ops.emplace_back(Matrix(std::cos(t) * h0 + std::sin(t) * h1));
        break;
      }
      case FamilyKind::MatrixPathFile:
        break;
    }
  }
  return FamilySample(*grid, std::move(ops), threads);
}

FamilySample load_matrix_path(const std::filesystem::path& path, int threads) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open matrix path file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("matrix path file " + path.string() + ": " + e.what());
  }
  auto fail = [&](const std::string& where) {
    throw InvalidArgument("matrix path file " + path.string() + ": invalid field " + where);
  };
  if (!doc.is_object() || !doc.contains("dim") || !doc["dim"].is_number_integer()) fail("dim");
  const auto dim = doc["dim"].get<Index>();
  if (dim < 1) fail("dim");
  if (!doc.contains("grid") || !doc["grid"].is_array()) fail("grid");
  if (!doc.contains("matrices") || !doc["matrices"].is_array()) fail("matrices");
  std::vector<double> grid;
  for (std::size_t i = 0; i < doc["grid"].size(); ++i) {
    if (!doc["grid"][i].is_number()) fail("grid[" + std::to_string(i) + "]");
    grid.push_back(doc["grid"][i].get<double>());
  }
  const auto& mats = doc["matrices"];
  if (mats.size() != grid.size()) fail("matrices (length differs from grid)");
  std::vector<HermitianOperator> ops;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const std::string base = "matrices[" + std::to_string(k) + "]";
    if (!mats[k].is_array() || static_cast<Index>(mats[k].size()) != dim) fail(base);
    Matrix m(dim, dim);
    for (Index r = 0; r < dim; ++r) {
      const auto& row = mats[k][static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Index>(row.size()) != dim) {
        fail(base + "[" + std::to_string(r) + "]");
      }
      for (Index c = 0; c < dim; ++c) {
        const auto& e = row[static_cast<std::size_t>(c)];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
          fail(base + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      }
    }
    ops.emplace_back(m);
  }
  return FamilySample(ParameterGrid(std::move(grid)), std::move(ops), threads);
}

void save_matrix_path(const FamilySample& s, const std::filesystem::path& path) {
  json doc;
  doc["dim"] = s.dim();
  doc["grid"] = s.grid().points();
  json mats = json::array();
  for (std::size_t k = 0; k < s.size(); ++k) {
    json rows = json::array();
    const Matrix& m = s.op(k).matrix();
    for (Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
      rows.push_back(std::move(row));
    }
    mats.push_back(std::move(rows));
  }
  doc["matrices"] = std::move(mats);
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write matrix path file " + path.string());
  out << doc.dump() << '\n';
}

Index embedding_offset(const FamilySpec& spec, Index small_dim, Index large_dim) {
  switch (spec.kind) {
    case FamilyKind::DiracCircle:
    case FamilyKind::HarmonicPerturbed:
      return (large_dim - small_dim) / 2;
    default:
      return 0;
  }
}

double default_truncation_tolerance(const FamilySpec& spec) {
  return spec.analytic() ? 1e-8 : 1e-3;
}

namespace {

std::vector<double> inside(const RealVector& ev, const RealWindow& w) {
  std::vector<double> out;
  for (Index k = 0; k < ev.size(); ++k) {
    if (w.contains(ev(k))) out.push_back(ev(k));
  }
  return out;
}

double hausdorff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto directed = [](const std::vector<double>& p, const std::vector<double>& q) {
    double worst = 0.0;
    for (double u : p) {
      double best = std::numeric_limits<double>::infinity();
      for (double v : q) best = std::min(best, std::abs(u - v));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace

TruncationReport truncation_check(const FamilySpec& spec, const ParameterGrid& grid,
                                  const std::vector<int>& dims, const RealWindow& window,
                                  std::optional<double> tolerance, const Tolerances& tol) {
  if (dims.size() < 2) throw InvalidArgument("truncation check needs at least two dimensions");
  for (std::size_t i = 1; i < dims.size(); ++i) {
    if (dims[i] <= dims[i - 1]) throw InvalidArgument("truncation dimensions must increase");
  }
  TruncationReport report;
  report.tolerance = tolerance.value_or(default_truncation_tolerance(spec));
  std::vector<FamilySample> samples;
  for (int d : dims) samples.push_back(sample(spec.with_dimension(d), grid));

  for (const auto& s : samples) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double m = window_margin(s.eigenvalues(i), window);
      if (m < tol.edge) throw EdgeOnSpectrum(m, tol.edge, static_cast<std::ptrdiff_t>(i));
    }
  }

  report.stable = true;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const auto& small = samples[k];
    const auto& large = samples[k + 1];
    TruncationStep step;
    step.small_dim = static_cast<int>(small.dim());
    step.large_dim = static_cast<int>(large.dim());
    const Index off = embedding_offset(spec, small.dim(), large.dim());
    for (std::size_t i = 0; i < small.size(); ++i) {
      step.max_hausdorff =
          std::max(step.max_hausdorff, hausdorff(inside(small.eigenvalues(i), window),
                                                 inside(large.eigenvalues(i), window)));
      const Matrix ps = spectral_projection(small.spectrum(i), window, tol).projector;
      const Matrix pl = spectral_projection(large.spectrum(i), window, tol).projector;
      const Matrix compressed = pl.block(off, off, small.dim(), small.dim());
      step.max_projection_distance =
          std::max(step.max_projection_distance, hermitian_norm(ps - compressed));
    }
    step.stable = step.max_hausdorff <= report.tolerance &&
                  step.max_projection_distance <= report.tolerance;
    report.stable = report.stable && step.stable;
    report.steps.push_back(step);
  }
  return report;
}

SignCheckReport essential_sign_check(const FamilySample& s, int k, const Tolerances& tol) {
  if (k < 1) throw InvalidArgument("sign-count threshold must be >= 1");
  SignCheckReport report;
  report.threshold = k;
  for (std::size_t i = 0; i < s.size(); ++i) {
    SignCheckPoint p;
    const auto& ev = s.eigenvalues(i);
    for (Index j = 0; j < ev.size(); ++j) {
      if (ev(j) < -tol.edge) ++p.negative;
      if (ev(j) > tol.edge) ++p.positive;
    }
    if ((p.negative < k || p.positive < k) && !report.first_failure) report.first_failure = i;
    report.points.push_back(p);
  }
  report.passed = !report.first_failure.has_value();
  return report;
}

}  // namespace opfam
