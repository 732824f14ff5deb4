#include "opfam/spectral_flow.hpp"

#include <cmath>
#include <limits>

#include "adapted_internal.hpp"

namespace opfam {

std::string_view to_string(FlowMethod method) {
  return method == FlowMethod::Tracking ? "tracking" : "partition";
}

namespace {

void check_endpoints(const FamilySample& sample, const Tolerances& tol) {
  for (std::size_t i : {std::size_t{0}, sample.size() - 1}) {
    const double m = sample.eigenvalues(i).cwiseAbs().minCoeff();
    if (m <= tol.edge) throw EndpointOnSpectrum(i, m);
  }
}

int sign_of(double t, double tol) {
  if (t > tol) return 1;
  if (t < -tol) return -1;
  return 0;
}

// Width of the spectral gap around zero; infinite when one side is empty.
double gap_at_zero(const RealVector& ev, double tol) {
  double below = -std::numeric_limits<double>::infinity();
  double above = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < ev.size(); ++k) {
    if (ev(k) < -tol) below = std::max(below, ev(k));
    if (ev(k) > tol) above = std::min(above, ev(k));
  }
  if (std::isinf(below) || std::isinf(above)) return std::numeric_limits<double>::infinity();
  return above - below;
}

int count_above(const RealVector& ev, double level) {
  int n = 0;
  for (Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > level) ++n;
  }
  return n;
}

int nonnegative_count(const RealVector& ev, double level) {
  int n = 0;
  for (Index k = 0; k < ev.size(); ++k) {
    if (ev(k) >= 0.0 && ev(k) <= level) ++n;
  }
  return n;
}

}  // namespace

FlowResult flow_by_tracking(const FamilySample& sample, const Tolerances& tol) {
  check_endpoints(sample, tol);
  FlowResult out;
  out.method = FlowMethod::Tracking;
  const Index dim = sample.dim();
  std::vector<int> last_sign(static_cast<std::size_t>(dim));
  std::vector<std::size_t> last_index(static_cast<std::size_t>(dim), 0);
  for (Index b = 0; b < dim; ++b) {
    last_sign[static_cast<std::size_t>(b)] = sign_of(sample.eigenvalues(0)(b), tol.edge);
  }

  for (std::size_t j = 0; j + 1 < sample.size(); ++j) {
    const RealVector& left = sample.eigenvalues(j);
    const RealVector& right = sample.eigenvalues(j + 1);
    const double bound = gap_at_zero(left, tol.edge) / 2.0;
    for (Index b = 0; b < dim; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      const int s_left = sign_of(left(b), tol.edge);
      const int s_right = sign_of(right(b), tol.edge);
      if (s_left != s_right) {
        const double movement = std::abs(right(b) - left(b));
        if (movement > bound) throw AmbiguousMatching(j, movement, bound);
      }
      if (s_right == 0) continue;
      if (s_right != last_sign[bi]) {
        out.crossings.push_back({bi, last_index[bi], j + 1, s_right});
        out.flow += s_right;
        last_sign[bi] = s_right;
      }
      last_index[bi] = j + 1;
    }
  }
  return out;
}

FlowResult flow_by_partition(const FamilySample& sample, const PartitionOptions& options) {
  check_endpoints(sample, options.tol);
  FlowResult out;
  out.method = FlowMethod::Partition;
  FlowPartition part;
  part.breakpoints.push_back(0);

  CertifyOptions certify;
  certify.projection_cap = options.projection_cap;
  certify.tol = options.tol;
  const double ceiling = truncation_ceiling(sample);
  const std::size_t last = sample.size() - 1;

  std::size_t start = 0;
  while (start < last) {
    const auto candidates = admissible_levels(sample.eigenvalues(start), 0.0, ceiling, options.tol);
    std::size_t end = start;
    double level = 0.0;
    for (const auto& cand : candidates) {
      detail::LevelModuli moduli(sample, cand.level);
      const int rank = window_rank(sample.eigenvalues(start), RealWindow::symmetric(cand.level));
      const int above = count_above(sample.eigenvalues(start), cand.level);
      std::size_t e = start;
      // A branch that leaves above c and reappears below -c jumped over the
      // window between samples; the segment must end before it.
      while (e < last && count_above(sample.eigenvalues(e + 1), cand.level) == above &&
             !detail::check_point(sample, e + 1, cand.level, rank, e, certify, &moduli)) {
        ++e;
      }
      if (e > start) {
        end = e;
        level = cand.level;
        break;
      }
    }
    if (end == start) throw PartitionFailed(start);
    const int contribution = nonnegative_count(sample.eigenvalues(end), level) -
                             nonnegative_count(sample.eigenvalues(start), level);
    part.breakpoints.push_back(end);
    part.levels.push_back(level);
    part.contributions.push_back(contribution);
    out.flow += contribution;
    start = end;
  }
  out.partition = std::move(part);
  return out;
}

}  // namespace opfam
