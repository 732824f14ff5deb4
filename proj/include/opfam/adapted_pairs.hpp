#pragma once

// Adapted pairs (U, eps) on a sampled family: certification, the level
// search behind "for every b there is an adapted (U, c) with c > b", the
// finite covering of [-c, c] by shifted windows, and the two equivalent
// routes to the discrete-spectrum property.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opfam/family_models.hpp"

namespace opfam {

/// A verified adapted pair. The moduli are maxima over adjacent grid points
/// of ||P_y - P_y'|| and ||A_y P_y - A_y' P_y'|| with P = P_[-level, level].
struct AdaptedPairCertificate {
  GridRange range;
  double level = 0.0;
  int rank = 0;
  double margin = 0.0;
  double projection_modulus = 0.0;
  double restriction_modulus = 0.0;
};

enum class ViolationKind { EdgeOnSpectrum, RankJump, ProjectionModulus, RestrictionModulus };

/// First failing condition of an adapted-pair check.
struct Violation {
  ViolationKind kind = ViolationKind::EdgeOnSpectrum;
  std::size_t index = 0;
  std::size_t other_index = 0;  ///< second point of a failing edge
  int rank = 0;
  int other_rank = 0;
  double value = 0.0;  ///< margin or modulus that failed

  std::string describe() const;
};

struct CertifyOptions {
  std::optional<double> projection_cap;
  std::optional<double> restriction_cap;
  bool compute_moduli = true;
  Tolerances tol{};
};

using CertifyResult = std::variant<AdaptedPairCertificate, Violation>;

CertifyResult certify_adapted_pair(const FamilySample& sample, GridRange range, double level,
                                   const CertifyOptions& options = {});

/// factor * min over the grid of max |lambda(A_y)|.
double truncation_ceiling(const FamilySample& sample, double factor = 0.9);

struct LevelCandidate {
  double level = 0.0;
  double width = 0.0;   ///< width of the clipped gap the level sits in
  double margin = 0.0;  ///< distance of +-level to the spectrum
};

/// Symmetric levels c in (lower, upper) with +-c off the spectrum: one per
/// gap of {|lambda|} clipped to (lower, upper), at the gap midpoint, ordered
/// widest first with ties going to the smaller level.
std::vector<LevelCandidate> admissible_levels(const RealVector& eigenvalues, double lower,
                                              double upper, const Tolerances& tol = {});

struct FindOptions {
  double gap_search_span = 1.0;
  std::optional<double> ceiling;  ///< defaults to truncation_ceiling(sample)
  CertifyOptions certify{};
};

/// Adapted pair with level c > b whose range contains x_index. Throws NoGap.
AdaptedPairCertificate find_adapted_pair(const FamilySample& sample, std::size_t x_index,
                                         double b, const FindOptions& options = {});

/// Largest range around x_index on which `level` stays adapted, growing one
/// step at a time on alternating sides and staying inside `bounds`.
GridRange grow_adapted_range(const FamilySample& sample, std::size_t x_index, double level,
                             GridRange bounds, const CertifyOptions& options = {});

struct CoveringCertificate {
  double level = 0.0;  ///< c
  std::vector<double> lambdas;
  std::vector<double> epsilons;
  std::vector<GridRange> ranges;
  double c_minus = 0.0;
  double c_plus = 0.0;
  GridRange intersection;
  AdaptedPairCertificate pair;  ///< (U, c) with U inside the intersection
};

/// Supplies an adapted pair for the shifted family A - shift near x_index.
using ShiftedCertifier = std::function<AdaptedPairCertificate(
    const FamilySample& shifted, std::size_t x_index, double shift)>;

/// find_adapted_pair with b -> 0+ and windows [shift - eps, shift + eps]
/// kept inside the truncation ceiling of the unshifted sample.
ShiftedCertifier default_shifted_certifier(const FamilySample& sample,
                                           const CertifyOptions& options = {});

/// Finite set of shifts whose windows cover [-c, c], built outward from 0,
/// and the adapted pair (U, c) obtained on the intersection of their ranges.
CoveringCertificate covering_construction(const FamilySample& sample, std::size_t x_index,
                                          double c, ShiftedCertifier certifier = {});

struct LevelReport {
  double b = 0.0;
  bool lemma_passed = false;
  std::vector<AdaptedPairCertificate> certificates;  ///< one per grid point that passed
  std::vector<std::size_t> lemma_failures;
  std::vector<std::string> lemma_failure_reasons;
  bool definition_checked = false;
  bool definition_passed = false;
  std::vector<std::size_t> definition_failures;
  bool routes_agree = true;
};

struct DiscreteSpectrumReport {
  double ceiling = 0.0;
  std::vector<double> sweep;  ///< shifts checked by the definitional route
  std::vector<LevelReport> levels;
  bool passed = false;
  bool routes_agree = true;
};

struct DiscreteSpectrumOptions {
  FindOptions find{};
  bool run_definition_route = true;
  std::size_t sweep_points = 41;  ///< uniform shifts on [-max b, max b], plus every +-b
};

/// Lemma route: find_adapted_pair at every grid point for every b.
/// Definitional route: every shift in the sweep admits an adapted pair at
/// every grid point, windows kept inside the ceiling.
DiscreteSpectrumReport discrete_spectrum_certify(const FamilySample& sample,
                                                 const std::vector<double>& b_levels,
                                                 const DiscreteSpectrumOptions& options = {});

}  // namespace opfam
