#pragma once

// Graph (uniform resolvent) and Riesz distances, continuity moduli along a
// grid, and the quantitative certificates that a discrete-spectrum family is
// graph continuous and that a strictly adapted family is Riesz continuous.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "opfam/adapted_pairs.hpp"

namespace opfam {

/// ||(A + i)^{-1} - (B + i)^{-1}||
double graph_distance(const HermitianOperator& a, const HermitianOperator& b);
double graph_distance(const SpectralDecomposition& a, const SpectralDecomposition& b);

/// ||gamma(A) - gamma(B)||
double riesz_distance(const HermitianOperator& a, const HermitianOperator& b);
double riesz_distance(const SpectralDecomposition& a, const SpectralDecomposition& b);

enum class Metric { Graph, Riesz };
std::string_view to_string(Metric metric);

struct ModulusEdge {
  double x_left = 0.0;
  double x_right = 0.0;
  double value = 0.0;
};

struct ContinuityModulus {
  Metric metric = Metric::Graph;
  std::vector<ModulusEdge> edges;
  double max = 0.0;
};

ContinuityModulus continuity_modulus(const FamilySample& sample, Metric metric);

/// Matrices are only embedded in certificates up to this dimension.
inline constexpr Index kEmbedDimLimit = 64;

struct Theorem1Certificate {
  std::size_t x_index = 0;
  double delta = 0.0;
  double level_c = 0.0;
  GridRange adapted_range;  ///< U from the adapted pair
  GridRange range;          ///< shrunk neighborhood where ||B_y - B_x|| < delta
  std::vector<Matrix> truncated_resolvents;  ///< B_y over `range`, empty above the embed limit
  double tail_bound = 0.0;   ///< max ||(A_y + i)^{-1} - B_y||
  double b_modulus = 0.0;    ///< max ||B_y - B_x||
  double final_bound = 0.0;  ///< max ||(A_y + i)^{-1} - (A_x + i)^{-1}||
};

struct Theorem1Options {
  FindOptions find{};
  Index embed_dim_limit = kEmbedDimLimit;
};

/// Builds B_y = (A_y + i)^{-1} on im P_[-c, c](A_y), zero on the complement,
/// with c > 1 / delta from an adapted pair, shrinks the neighborhood until
/// ||B_y - B_x|| < delta and returns only if tail_bound < delta,
/// b_modulus < delta and final_bound < 3 delta. Throws NoGap or BoundViolated.
Theorem1Certificate theorem1_certify(const FamilySample& sample, std::size_t x_index,
                                     double delta, const Theorem1Options& options = {});

struct StrictAdaptedness {
  double epsilon = 0.0;
  GridRange range;       ///< adapted range of level epsilon around x
  double modulus = 0.0;  ///< max adjacent ||P_[eps, inf)(A_y) - P_[eps, inf)(A_y')||
  std::optional<std::size_t> worst_edge;  ///< left index of the edge attaining the modulus
  double cap = 0.0;
  bool passed = false;
};

/// Continuity of the positive spectral projections in the identity
/// trivialization over the adapted range of level epsilon.
/// Throws EdgeOnSpectrum when +-epsilon meets the spectrum at x_index.
StrictAdaptedness strict_adaptedness_certify(const FamilySample& sample, std::size_t x_index,
                                             double epsilon, double cap,
                                             const Tolerances& tol = {});

/// What "fully adapted" measures: the function applied to each operator,
/// the level threshold making f(c) > 1 - delta, and the level ceiling.
struct AdaptednessProfile {
  std::string name;
  std::function<double(double)> transform;
  std::function<double(double)> threshold;  ///< delta -> minimal level
  std::optional<double> ceiling;            ///< defaults to the truncation ceiling
};

/// gamma and c > (1 - delta) / sqrt(2 delta - delta^2).
AdaptednessProfile riesz_profile();

/// Smallest c with gamma(c) > 1 - delta.
double riesz_level_threshold(double delta);

struct Theorem2Point {
  Matrix q;          ///< P_(-c, c)
  Matrix q_plus;     ///< P_[c, inf)
  Matrix q_minus;    ///< 1 - q - q_plus
  Matrix f_inner;    ///< f(A') on im q
  Matrix f_plus;     ///< f(A+) on im q_plus
  Matrix f_minus;    ///< f(A-) on im q_minus
};

struct Theorem2Certificate {
  std::string profile;
  std::size_t x_index = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double level_c = 0.0;
  double level_threshold = 0.0;
  double strict_modulus = 0.0;
  GridRange adapted_range;  ///< U' (levels eps and c both adapted, projections continuous)
  GridRange range;          ///< U''
  std::vector<Theorem2Point> points;  ///< over `range`, empty above the embed limit
  double decomposition_residual = 0.0;  ///< max ||f(A) - (f(A-) + f(A') + f(A+))||
  double partition_residual = 0.0;      ///< max ||q + q+ + q- - 1||
  double positive_identity_residual = 0.0;  ///< max ||q+ - (P_[eps,inf) - P_[eps,c)(A'))||
  double negative_identity_residual = 0.0;  ///< max ||q- - P_(-inf,-c]||
  double ineq2_plus = 0.0;   ///< max ||f(A+) - q+||
  double ineq2_minus = 0.0;  ///< max ||f(A-) + q-||
  double ineq3_inner = 0.0;  ///< max ||f(A'_y) - f(A'_x)||
  double ineq3_minus = 0.0;  ///< max ||q-_y - q-_x||
  double ineq3_plus = 0.0;   ///< max ||q+_y - q+_x||
  double final_bound = 0.0;  ///< max ||f(A_y) - f(A_x)||
};

struct Theorem2Options {
  FindOptions find{};
  Index embed_dim_limit = kEmbedDimLimit;
  AdaptednessProfile profile = riesz_profile();
};

/// Requires 0 < delta < 1/2. Scans epsilon over midpoints of the positive
/// spectral gaps of A_x (ascending) until the projections P_[eps, inf) pass
/// the cap, picks an adapted level c above both epsilon and the threshold,
/// shrinks to U'' and returns only if every inequality holds.
/// Throws StrictAdaptednessFailed, NoGap or BoundViolated.
Theorem2Certificate theorem2_certify(const FamilySample& sample, std::size_t x_index,
                                     double delta, double cap,
                                     const Theorem2Options& options = {});

}  // namespace opfam
