#pragma once

// Finite surrogate of compactly-polarized operators (self-adjoint
// contractions whose spectrum clusters at -1 and +1), the weak
// discrete-spectrum property with levels confined to (0, 1), and the
// correspondence with discrete-spectrum families under the bounded transform.

#include <optional>
#include <vector>

#include "opfam/topology_metrics.hpp"

namespace opfam {

/// All but `interior_budget` eigenvalues lie within `eta` of +-1 and the
/// norm is at most 1 + norm_slack.
struct PolarizationCheck {
  double eta = 0.1;
  int interior_budget = 0;
  double norm_slack = 1e-9;

  /// eta = 0.1, interior budget dim / 4.
  static PolarizationCheck defaults_for(Index dim);
  void validate() const;
};

struct PolarizationResult {
  double norm = 0.0;
  int interior = 0;    ///< eigenvalues in (-1 + eta, 1 - eta)
  int near_minus = 0;  ///< eigenvalues within eta of -1
  int near_plus = 0;   ///< eigenvalues within eta of +1
  bool passed = false;
};

PolarizationResult compact_polarization_check(const RealVector& eigenvalues,
                                              const PolarizationCheck& check);
PolarizationResult compact_polarization_check(const HermitianOperator& a,
                                              const PolarizationCheck& check);

struct WeakDiscreteSpectrumReport {
  std::vector<PolarizationResult> fibers;
  std::optional<std::size_t> first_unpolarized;
  DiscreteSpectrumReport levels;  ///< ceiling 1 - eta unless overridden
  bool passed = false;
};

struct WeakDiscreteSpectrumOptions {
  std::optional<double> ceiling;  ///< defaults to 1 - eta
  std::size_t sweep_points = 41;
  bool run_definition_route = true;
};

/// b_levels must lie in (0, 1). Same code path as the discrete-spectrum
/// certificate with the level domain confined below 1 - eta.
WeakDiscreteSpectrumReport weak_discrete_spectrum_certify(
    const FamilySample& sample, const std::vector<double>& b_levels,
    const PolarizationCheck& check, const WeakDiscreteSpectrumOptions& options = {});

struct CorrespondenceLevel {
  double level = 0.0;
  double transformed_level = 0.0;
  bool discrete_passed = false;
  bool weak_passed = false;
  bool agree = false;
};

struct CorrespondenceReport {
  bool sign_check_passed = false;
  std::vector<CorrespondenceLevel> levels;
  std::size_t rank_checks = 0;
  std::size_t rank_mismatches = 0;
  DiscreteSpectrumReport discrete;
  WeakDiscreteSpectrumReport weak;
  bool consistent = false;  ///< sign check, per-level agreement, zero rank mismatches
};

/// Runs the discrete-spectrum certificate on the sample at `levels` and the
/// weak certificate on gamma(sample) at gamma(levels), with the ceiling
/// carried through gamma, and compares window ranks of every certificate.
CorrespondenceReport transform_correspondence_check(const FamilySample& sample,
                                                    const std::vector<double>& levels,
                                                    const PolarizationCheck& check);

/// Identity transform, threshold 1 - delta, ceiling 1 - eta.
AdaptednessProfile polarized_profile(double eta);

/// Theorem-2 style certificate for a polarized family (norm continuity of
/// the operators themselves). Every fiber must pass the polarization check.
Theorem2Certificate theorem3_certify(const FamilySample& sample, std::size_t x_index,
                                     double delta, double cap, const PolarizationCheck& check,
                                     const FindOptions& find = {});

}  // namespace opfam
