#include "opfam/adapted_pairs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "adapted_internal.hpp"

namespace opfam {

std::string Violation::describe() const {
  char buf[256];
  switch (kind) {
    case ViolationKind::EdgeOnSpectrum:
      std::snprintf(buf, sizeof buf, "edge on spectrum at grid index %zu (margin %.3e)", index,
                    value);
      break;
    case ViolationKind::RankJump:
      std::snprintf(buf, sizeof buf, "rank jump between grid indices %zu and %zu (%d -> %d)",
                    index, other_index, rank, other_rank);
      break;
    case ViolationKind::ProjectionModulus:
      std::snprintf(buf, sizeof buf,
                    "projection modulus %.6g above cap on edge (%zu, %zu)", value, index,
                    other_index);
      break;
    case ViolationKind::RestrictionModulus:
      std::snprintf(buf, sizeof buf,
                    "restriction modulus %.6g above cap on edge (%zu, %zu)", value, index,
                    other_index);
      break;
  }
  return buf;
}

namespace detail {

LevelModuli::LevelModuli(const FamilySample& sample, double level)
    : sample_(sample), level_(level) {}

const Matrix& LevelModuli::projection(std::size_t i) {
  auto it = projections_.find(i);
  if (it == projections_.end()) {
    const RealWindow w = RealWindow::symmetric(level_);
    Matrix p = sample_.spectrum(i).apply([](double) { return Complex(1.0); },
                                         [&](double t) { return w.contains(t); });
    it = projections_.emplace(i, std::move(p)).first;
  }
  return it->second;
}

const Matrix& LevelModuli::compression(std::size_t i) {
  auto it = compressions_.find(i);
  if (it == compressions_.end()) {
    const RealWindow w = RealWindow::symmetric(level_);
    Matrix p = sample_.spectrum(i).apply([](double t) { return Complex(t); },
                                         [&](double t) { return w.contains(t); });
    it = compressions_.emplace(i, std::move(p)).first;
  }
  return it->second;
}

EdgeModuli LevelModuli::edge(std::size_t left) {
  auto it = edges_.find(left);
  if (it != edges_.end()) return it->second;
  EdgeModuli m;
  m.projection = hermitian_norm(projection(left) - projection(left + 1));
  m.restriction = hermitian_norm(compression(left) - compression(left + 1));
  edges_.emplace(left, m);
  return m;
}

LevelModuli& ModuliCache::at(const FamilySample& sample, double level) {
  auto it = levels_.find(level);
  if (it == levels_.end()) {
    it = levels_.emplace(level, std::make_unique<LevelModuli>(sample, level)).first;
  }
  return *it->second;
}

std::optional<Violation> check_point(const FamilySample& sample, std::size_t i, double level,
                                     int expected_rank, std::size_t neighbor,
                                     const CertifyOptions& options, LevelModuli* moduli) {
  const RealWindow w = RealWindow::symmetric(level);
  const double margin = window_margin(sample.eigenvalues(i), w);
  if (margin < options.tol.edge) {
    return Violation{ViolationKind::EdgeOnSpectrum, i, i, 0, 0, margin};
  }
  const int rank = window_rank(sample.eigenvalues(i), w);
  if (rank != expected_rank) {
    return Violation{ViolationKind::RankJump, neighbor, i, expected_rank, rank, 0.0};
  }
  if (moduli && (options.projection_cap || options.restriction_cap) && neighbor != i) {
    const std::size_t left = std::min(i, neighbor);
    const EdgeModuli e = moduli->edge(left);
    if (options.projection_cap && e.projection > *options.projection_cap) {
      return Violation{ViolationKind::ProjectionModulus, left, left + 1, rank, rank, e.projection};
    }
    if (options.restriction_cap && e.restriction > *options.restriction_cap) {
      return Violation{ViolationKind::RestrictionModulus, left, left + 1, rank, rank,
                       e.restriction};
    }
  }
  return std::nullopt;
}

CertifyResult certify(const FamilySample& sample, GridRange range, double level,
                      const CertifyOptions& options, LevelModuli* moduli) {
  if (!(level > 0.0)) throw InvalidArgument("adapted-pair level must be positive");
  if (range.lo > range.hi || range.hi >= sample.size()) {
    throw InvalidArgument("grid range outside the sample");
  }
  const RealWindow w = RealWindow::symmetric(level);
  AdaptedPairCertificate cert;
  cert.range = range;
  cert.level = level;
  cert.margin = std::numeric_limits<double>::infinity();

  // Edge and rank conditions first, in grid order; moduli only once those hold.
  const double first_margin = window_margin(sample.eigenvalues(range.lo), w);
  if (first_margin < options.tol.edge) {
    return Violation{ViolationKind::EdgeOnSpectrum, range.lo, range.lo, 0, 0, first_margin};
  }
  cert.rank = window_rank(sample.eigenvalues(range.lo), w);
  for (std::size_t i = range.lo; i <= range.hi; ++i) {
    const double margin = window_margin(sample.eigenvalues(i), w);
    if (margin < options.tol.edge) {
      return Violation{ViolationKind::EdgeOnSpectrum, i, i, 0, 0, margin};
    }
    const int rank = window_rank(sample.eigenvalues(i), w);
    if (rank != cert.rank) {
      return Violation{ViolationKind::RankJump, i - 1, i, cert.rank, rank, 0.0};
    }
    cert.margin = std::min(cert.margin, margin);
  }

  const bool need_moduli =
      options.compute_moduli || options.projection_cap || options.restriction_cap;
  if (!need_moduli) return cert;
  std::optional<LevelModuli> local;
  if (!moduli) moduli = &local.emplace(sample, level);
  for (std::size_t i = range.lo; i < range.hi; ++i) {
    const EdgeModuli e = moduli->edge(i);
    if (options.projection_cap && e.projection > *options.projection_cap) {
      return Violation{ViolationKind::ProjectionModulus, i, i + 1, cert.rank, cert.rank,
                       e.projection};
    }
    if (options.restriction_cap && e.restriction > *options.restriction_cap) {
      return Violation{ViolationKind::RestrictionModulus, i, i + 1, cert.rank, cert.rank,
                       e.restriction};
    }
    cert.projection_modulus = std::max(cert.projection_modulus, e.projection);
    cert.restriction_modulus = std::max(cert.restriction_modulus, e.restriction);
  }
  return cert;
}

GridRange grow(const FamilySample& sample, std::size_t x_index, double level, GridRange bounds,
               const CertifyOptions& options, LevelModuli* moduli) {
  const RealWindow w = RealWindow::symmetric(level);
  const int rank = window_rank(sample.eigenvalues(x_index), w);
  GridRange r{x_index, x_index};
  bool left_open = r.lo > bounds.lo;
  bool right_open = r.hi < bounds.hi;
  while (left_open || right_open) {
    if (left_open) {
      if (!check_point(sample, r.lo - 1, level, rank, r.lo, options, moduli)) {
        --r.lo;
        left_open = r.lo > bounds.lo;
      } else {
        left_open = false;
      }
    }
    if (right_open) {
      if (!check_point(sample, r.hi + 1, level, rank, r.hi, options, moduli)) {
        ++r.hi;
        right_open = r.hi < bounds.hi;
      } else {
        right_open = false;
      }
    }
  }
  return r;
}

AdaptedPairCertificate find(const FamilySample& sample, std::size_t x_index, double b,
                            const FindOptions& options, LevelModuli* moduli,
                            ModuliCache* cache) {
  if (!(b >= 0.0)) throw InvalidArgument("level lower bound must be non-negative");
  if (x_index >= sample.size()) throw InvalidArgument("grid index outside the sample");
  const double ceiling = options.ceiling.value_or(truncation_ceiling(sample));
  const double upper = std::min(b + options.gap_search_span, ceiling);
  const auto candidates =
      admissible_levels(sample.eigenvalues(x_index), b, upper, options.certify.tol);
  if (candidates.empty()) throw NoGap(x_index, b, ceiling);
  const double c = candidates.front().level;
  if (!moduli && cache) moduli = &cache->at(sample, c);
  std::optional<LevelModuli> local;
  if (!moduli && (options.certify.compute_moduli || options.certify.projection_cap ||
                  options.certify.restriction_cap)) {
    moduli = &local.emplace(sample, c);
  }
  const GridRange range =
      grow(sample, x_index, c, sample.full_range(), options.certify, moduli);
  auto result = certify(sample, range, c, options.certify, moduli);
  if (auto* v = std::get_if<Violation>(&result)) {
    // grow() only admits points that pass the same checks.
    throw Error("adapted range failed re-certification: " + v->describe());
  }
  return std::get<AdaptedPairCertificate>(result);
}

}  // namespace detail

CertifyResult certify_adapted_pair(const FamilySample& sample, GridRange range, double level,
                                   const CertifyOptions& options) {
  return detail::certify(sample, range, level, options, nullptr);
}

double truncation_ceiling(const FamilySample& sample, double factor) {
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    lowest = std::min(lowest, sample.spectrum(i).max_abs_eigenvalue());
  }
  return factor * lowest;
}

std::vector<LevelCandidate> admissible_levels(const RealVector& eigenvalues, double lower,
                                              double upper, const Tolerances& tol) {
  std::vector<LevelCandidate> out;
  if (!(upper > lower)) return out;
  std::vector<double> abs_values(static_cast<std::size_t>(eigenvalues.size()));
  for (Index k = 0; k < eigenvalues.size(); ++k) {
    abs_values[static_cast<std::size_t>(k)] = std::abs(eigenvalues(k));
  }
  std::sort(abs_values.begin(), abs_values.end());

  std::vector<double> cuts{lower};
  for (double a : abs_values) {
    if (a > lower && a < upper && a != cuts.back()) cuts.push_back(a);
  }
  cuts.push_back(upper);

  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double width = cuts[j + 1] - cuts[j];
    if (!(width > 0.0)) continue;
    LevelCandidate cand;
    cand.level = cuts[j] + width / 2.0;
    cand.width = width;
    cand.margin = std::numeric_limits<double>::infinity();
    for (double a : abs_values) cand.margin = std::min(cand.margin, std::abs(a - cand.level));
    if (cand.level > lower && cand.margin >= tol.edge) out.push_back(cand);
  }
  std::stable_sort(out.begin(), out.end(), [](const LevelCandidate& a, const LevelCandidate& b) {
    const double slack = 1e-12 * std::max({1.0, a.width, b.width});
    if (std::abs(a.width - b.width) > slack) return a.width > b.width;
    return a.level < b.level;
  });
  return out;
}

AdaptedPairCertificate find_adapted_pair(const FamilySample& sample, std::size_t x_index,
                                         double b, const FindOptions& options) {
  if (!(b > 0.0)) throw InvalidArgument("find_adapted_pair needs b > 0");
  return detail::find(sample, x_index, b, options, nullptr, nullptr);
}

GridRange grow_adapted_range(const FamilySample& sample, std::size_t x_index, double level,
                             GridRange bounds, const CertifyOptions& options) {
  if (!bounds.contains(x_index) || bounds.hi >= sample.size()) {
    throw InvalidArgument("growth bounds must contain the base point");
  }
  std::optional<detail::LevelModuli> moduli;
  if (options.projection_cap || options.restriction_cap) moduli.emplace(sample, level);
  return detail::grow(sample, x_index, level, bounds, options, moduli ? &*moduli : nullptr);
}

ShiftedCertifier default_shifted_certifier(const FamilySample& sample,
                                           const CertifyOptions& options) {
  const double ceiling = truncation_ceiling(sample);
  return [ceiling, options](const FamilySample& shifted, std::size_t x_index, double shift) {
    FindOptions find;
    find.ceiling = ceiling - std::abs(shift);
    find.gap_search_span = std::numeric_limits<double>::infinity();
    find.certify = options;
    return detail::find(shifted, x_index, 0.0, find, nullptr, nullptr);
  };
}

CoveringCertificate covering_construction(const FamilySample& sample, std::size_t x_index,
                                          double c, ShiftedCertifier certifier) {
  if (!(c > 0.0)) throw InvalidArgument("covering level must be positive");
  if (x_index >= sample.size()) throw InvalidArgument("grid index outside the sample");
  const Tolerances tol{};
  const double m = window_margin(sample.eigenvalues(x_index), RealWindow::symmetric(c));
  if (m < tol.edge) throw EdgeOnSpectrum(m, tol.edge, static_cast<std::ptrdiff_t>(x_index));
  if (!certifier) certifier = default_shifted_certifier(sample);

  CoveringCertificate cov;
  cov.level = c;
  auto add = [&](double shift) {
    const AdaptedPairCertificate cert = certifier(sample.shifted(shift), x_index, shift);
    cov.lambdas.push_back(shift);
    cov.epsilons.push_back(cert.level);
    cov.ranges.push_back(cert.range);
    return cert.level;
  };

  constexpr int kMaxShifts = 100000;
  const double eps0 = add(0.0);
  double right = eps0;   // (-left, right) is covered, open at both ends
  double left = -eps0;
  while (right <= c) {
    right += add(right);
    if (static_cast<int>(cov.lambdas.size()) > kMaxShifts) throw Error("covering did not close");
  }
  while (left >= -c) {
    left -= add(left);
    if (static_cast<int>(cov.lambdas.size()) > kMaxShifts) throw Error("covering did not close");
  }

  // Sort by shift so the certificate reads left to right.
  std::vector<std::size_t> order(cov.lambdas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cov.lambdas[a] < cov.lambdas[b]; });
  CoveringCertificate sorted = cov;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.lambdas[i] = cov.lambdas[order[i]];
    sorted.epsilons[i] = cov.epsilons[order[i]];
    sorted.ranges[i] = cov.ranges[order[i]];
  }
  cov = std::move(sorted);

  cov.c_minus = std::numeric_limits<double>::infinity();
  cov.c_plus = -std::numeric_limits<double>::infinity();
  cov.intersection = sample.full_range();
  for (std::size_t i = 0; i < cov.lambdas.size(); ++i) {
    cov.c_minus = std::min(cov.c_minus, cov.lambdas[i] - cov.epsilons[i]);
    cov.c_plus = std::max(cov.c_plus, cov.lambdas[i] + cov.epsilons[i]);
    cov.intersection.lo = std::max(cov.intersection.lo, cov.ranges[i].lo);
    cov.intersection.hi = std::min(cov.intersection.hi, cov.ranges[i].hi);
  }
  // Consecutive open intervals must overlap to cover [-c, c] without holes.
  for (std::size_t i = 0; i + 1 < cov.lambdas.size(); ++i) {
    if (!(cov.lambdas[i + 1] - cov.epsilons[i + 1] < cov.lambdas[i] + cov.epsilons[i])) {
      throw Error("covering intervals leave a gap");
    }
  }
  if (!(cov.c_minus < -c && c < cov.c_plus)) throw Error("covering does not reach past +-c");

  const GridRange u = grow_adapted_range(sample, x_index, c, cov.intersection);
  auto result = certify_adapted_pair(sample, u, c);
  if (auto* v = std::get_if<Violation>(&result)) {
    throw Error("covering pair failed certification: " + v->describe());
  }
  cov.pair = std::get<AdaptedPairCertificate>(result);
  return cov;
}

DiscreteSpectrumReport discrete_spectrum_certify(const FamilySample& sample,
                                                 const std::vector<double>& b_levels,
                                                 const DiscreteSpectrumOptions& options) {
  if (b_levels.empty()) throw InvalidArgument("discrete-spectrum check needs at least one level");
  for (double b : b_levels) {
    if (!(b > 0.0)) throw InvalidArgument("b levels must be positive");
  }
  DiscreteSpectrumReport report;
  report.ceiling = options.find.ceiling.value_or(truncation_ceiling(sample));
  FindOptions find = options.find;
  find.ceiling = report.ceiling;

  detail::ModuliCache cache;
  for (double b : b_levels) {
    LevelReport level;
    level.b = b;
    for (std::size_t x = 0; x < sample.size(); ++x) {
      try {
        level.certificates.push_back(detail::find(sample, x, b, find, nullptr, &cache));
      } catch (const NoGap& e) {
        level.lemma_failures.push_back(x);
        level.lemma_failure_reasons.emplace_back(e.what());
      }
    }
    level.lemma_passed = level.lemma_failures.empty();
    report.levels.push_back(std::move(level));
  }

  if (options.run_definition_route) {
    const double top = *std::max_element(b_levels.begin(), b_levels.end());
    std::vector<double> sweep;
    const std::size_t n = std::max<std::size_t>(options.sweep_points, 2);
    for (std::size_t k = 0; k < n; ++k) {
      sweep.push_back(-top + 2.0 * top * static_cast<double>(k) / static_cast<double>(n - 1));
    }
    for (double b : b_levels) {
      sweep.push_back(-b);
      sweep.push_back(b);
    }
    std::sort(sweep.begin(), sweep.end());
    sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
    report.sweep = sweep;

    // failing[s] = grid indices where shift sweep[s] admits no adapted pair.
    std::vector<std::vector<std::size_t>> failing(sweep.size());
    CertifyOptions quick = options.find.certify;
    quick.compute_moduli = false;
    for (std::size_t s = 0; s < sweep.size(); ++s) {
      const double shift = sweep[s];
      const double room = report.ceiling - std::abs(shift);
      const FamilySample shifted = sample.shifted(shift);
      FindOptions f;
      f.ceiling = room;
      f.gap_search_span = std::numeric_limits<double>::infinity();
      f.certify = quick;
      for (std::size_t x = 0; x < sample.size(); ++x) {
        try {
          detail::find(shifted, x, 0.0, f, nullptr, nullptr);
        } catch (const NoGap&) {
          failing[s].push_back(x);
        }
      }
    }
    for (auto& level : report.levels) {
      std::vector<bool> bad(sample.size(), false);
      for (std::size_t s = 0; s < sweep.size(); ++s) {
        if (std::abs(sweep[s]) > level.b) continue;
        for (std::size_t x : failing[s]) bad[x] = true;
      }
      for (std::size_t x = 0; x < sample.size(); ++x) {
        if (bad[x]) level.definition_failures.push_back(x);
      }
      level.definition_checked = true;
      level.definition_passed = level.definition_failures.empty();
      level.routes_agree = level.definition_passed == level.lemma_passed &&
                           level.definition_failures == level.lemma_failures;
      report.routes_agree = report.routes_agree && level.routes_agree;
    }
  }
  report.passed = std::all_of(report.levels.begin(), report.levels.end(),
                              [](const LevelReport& l) { return l.lemma_passed; });
  return report;
}

}  // namespace opfam
