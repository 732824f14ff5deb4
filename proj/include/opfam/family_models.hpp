#pragma once

// Parameter-indexed operator families sampled on a 1-D grid.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opfam/spectral_core.hpp"

namespace opfam {

/// Strictly increasing list of parameter values (at least two).
class ParameterGrid {
 public:
  explicit ParameterGrid(std::vector<double> points);

  static ParameterGrid linspace(double start, double end, std::size_t count);
  /// `count` points on [start, end] with the open window
  /// (center - half_width, center + half_width) cut out; half of the points on
  /// each side, the window edges themselves included.
  static ParameterGrid excluding(double start, double end, std::size_t count, double center,
                                 double half_width);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const noexcept { return points_; }

 private:
  std::vector<double> points_;
};

/// Inclusive range of grid indices; stands in for a neighborhood U of x.
struct GridRange {
  std::size_t lo = 0;
  std::size_t hi = 0;

  std::size_t size() const noexcept { return hi - lo + 1; }
  bool contains(std::size_t i) const noexcept { return i >= lo && i <= hi; }
  bool operator==(const GridRange&) const = default;
};

class FamilySample {
 public:
  /// Decomposes every operator; `threads` caps the worker count.
  FamilySample(ParameterGrid grid, std::vector<HermitianOperator> operators, int threads = 1);

  std::size_t size() const noexcept { return operators_.size(); }
  Index dim() const noexcept { return operators_.front().dim(); }
  const ParameterGrid& grid() const noexcept { return grid_; }
  double x(std::size_t i) const { return grid_[i]; }
  const HermitianOperator& op(std::size_t i) const { return operators_[i]; }
  const SpectralDecomposition& spectrum(std::size_t i) const { return spectra_[i]; }
  const RealVector& eigenvalues(std::size_t i) const { return spectra_[i].eigenvalues; }
  GridRange full_range() const noexcept { return {0, size() - 1}; }

  /// A_y - shift for every y. Reuses the eigenvectors.
  FamilySample shifted(double shift) const;
  /// gamma(A_y) for every y. Reuses the eigenvectors.
  FamilySample bounded_transformed() const;
  /// Sub-family on an index range (at least two points).
  FamilySample slice(GridRange range) const;
  /// Path traversed backwards; the grid becomes {-x_n, ..., -x_0}.
  FamilySample reversed() const;

 private:
  FamilySample(ParameterGrid grid, std::vector<HermitianOperator> operators,
               std::vector<SpectralDecomposition> spectra);

  ParameterGrid grid_;
  std::vector<HermitianOperator> operators_;
  std::vector<SpectralDecomposition> spectra_;
};

/// Joins two paths. If `second` starts where `first` ends (same x and same
/// operator) the junction is shared; otherwise `second` must start strictly
/// after `first`.
FamilySample concatenate(const FamilySample& first, const FamilySample& second);

enum class FamilyKind {
  DiracCircle,
  HarmonicPerturbed,
  TangentBlowup,
  LinearCrossing,
  RandomCrossings,
  MatrixPathFile,
};

std::string_view to_string(FamilyKind kind);
std::optional<FamilyKind> parse_family_kind(std::string_view name);

/// x -> offset + slope * x
struct AffinePath {
  double offset = 0.0;
  double slope = 1.0;
  double operator()(double x) const noexcept { return offset + slope * x; }
};

struct FamilySpec {
  FamilyKind kind = FamilyKind::DiracCircle;
  int modes = 1;                    ///< dirac_circle: n = -modes..modes
  int dim = 3;                      ///< harmonic_perturbed, linear_crossing, random_crossings
  AffinePath flux{0.0, 1.0};        ///< dirac_circle alpha(x)
  AffinePath coupling{0.0, 1.0};    ///< harmonic_perturbed g(x)
  std::vector<double> padding{-3.0, -2.0, 2.0, 3.0};  ///< tangent_blowup fixed eigenvalues
  std::uint64_t seed = 0;           ///< random_crossings
  std::filesystem::path path;       ///< matrix_path_file
  std::optional<int> truncate_to;   ///< matrix_path_file: leading block size

  /// Truncation dimension of the sampled operators.
  int dimension() const;
  /// Same family at another truncation dimension.
  FamilySpec with_dimension(int d) const;
  bool analytic() const noexcept { return kind != FamilyKind::MatrixPathFile; }
  void validate() const;
};

/// Samples the family on the grid. matrix_path_file uses the grid stored in
/// the file and requires `grid` (if given) to match it.
FamilySample sample(const FamilySpec& spec, const std::optional<ParameterGrid>& grid,
                    int threads = 1);

/// Reads the `{dim, grid, matrices}` JSON path format.
FamilySample load_matrix_path(const std::filesystem::path& path, int threads = 1);
void save_matrix_path(const FamilySample& sample, const std::filesystem::path& path);

/// Index offset placing the smaller truncation inside the larger one.
Index embedding_offset(const FamilySpec& spec, Index small_dim, Index large_dim);

struct TruncationStep {
  int small_dim = 0;
  int large_dim = 0;
  double max_hausdorff = 0.0;           ///< window eigenvalues; infinity if counts differ
  double max_projection_distance = 0.0; ///< after compression to the smaller space
  bool stable = false;
};

struct TruncationReport {
  double tolerance = 0.0;
  std::vector<TruncationStep> steps;
  bool stable = false;
};

/// Default tolerance: 1e-8 for analytic models, 1e-3 for file-loaded ones.
double default_truncation_tolerance(const FamilySpec& spec);

TruncationReport truncation_check(const FamilySpec& spec, const ParameterGrid& grid,
                                  const std::vector<int>& dims, const RealWindow& window,
                                  std::optional<double> tolerance = std::nullopt,
                                  const Tolerances& tol = {});

struct SignCheckPoint {
  int negative = 0;
  int positive = 0;
};

struct SignCheckReport {
  int threshold = 1;
  std::vector<SignCheckPoint> points;
  std::optional<std::size_t> first_failure;
  bool passed = false;
};

/// Every operator must carry at least k strictly negative and k strictly
/// positive eigenvalues (|lambda| > tol.edge).
SignCheckReport essential_sign_check(const FamilySample& sample, int k,
                                     const Tolerances& tol = {});

}  // namespace opfam
