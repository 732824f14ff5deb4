#pragma once

// Spectral flow through zero along a sampled path, by branch tracking and by
// a partition of the grid into adapted segments.

#include <optional>
#include <vector>

#include "opfam/adapted_pairs.hpp"

namespace opfam {

enum class FlowMethod { Tracking, Partition };
std::string_view to_string(FlowMethod method);

/// Segments [breakpoints[k], breakpoints[k+1]] with an adapted level each.
struct FlowPartition {
  std::vector<std::size_t> breakpoints;
  std::vector<double> levels;
  std::vector<int> contributions;  ///< rank change of P_[0, c] over each segment
};

/// Sign change of one sorted eigenvalue branch.
struct Crossing {
  std::size_t branch = 0;
  std::size_t from_index = 0;  ///< last grid point with the old sign
  std::size_t to_index = 0;    ///< first grid point with the new sign
  int direction = 0;           ///< +1 upward, -1 downward
};

struct FlowResult {
  int flow = 0;
  FlowMethod method = FlowMethod::Tracking;
  std::optional<FlowPartition> partition;
  std::vector<Crossing> crossings;
};

/// Matches the sorted eigenvalue lists of adjacent points in order and counts
/// signed zero crossings. A branch whose sign changes must move less than
/// half of the gap around zero at the left point, else AmbiguousMatching.
/// Eigenvalues within tol.edge of zero at interior points carry no sign.
FlowResult flow_by_tracking(const FamilySample& sample, const Tolerances& tol = {});

struct PartitionOptions {
  double projection_cap = 0.5;  ///< max ||P_y - P_y'|| inside a segment
  Tolerances tol{};
};

/// Greedy adapted partition. At each segment start the candidate levels are
/// the admissible gap midpoints of the start operator below the truncation
/// ceiling, widest gap first; the first one that extends the segment by at
/// least one edge is used. A segment also ends where the number of
/// eigenvalues above c changes, since a branch then crossed the window
/// between samples. Throws PartitionFailed or EndpointOnSpectrum.
FlowResult flow_by_partition(const FamilySample& sample, const PartitionOptions& options = {});

}  // namespace opfam
