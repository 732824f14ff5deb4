#include "opfam/polarized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace opfam {

PolarizationCheck PolarizationCheck::defaults_for(Index dim) {
  return {0.1, static_cast<int>(dim / 4), 1e-9};
}

void PolarizationCheck::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("polarization eta must lie in (0, 1)");
  if (interior_budget < 0) throw InvalidArgument("interior budget must be >= 0");
  if (!(norm_slack >= 0.0)) throw InvalidArgument("norm slack must be >= 0");
}

PolarizationResult compact_polarization_check(const RealVector& ev,
                                              const PolarizationCheck& check) {
  check.validate();
  PolarizationResult r;
  r.norm = ev.cwiseAbs().maxCoeff();
  for (Index k = 0; k < ev.size(); ++k) {
    const double t = ev(k);
    if (t > -1.0 + check.eta && t < 1.0 - check.eta) ++r.interior;
    if (std::abs(t + 1.0) <= check.eta) ++r.near_minus;
    if (std::abs(t - 1.0) <= check.eta) ++r.near_plus;
  }
  r.passed = r.norm <= 1.0 + check.norm_slack && r.interior <= check.interior_budget &&
             r.near_minus > 0 && r.near_plus > 0;
  return r;
}

PolarizationResult compact_polarization_check(const HermitianOperator& a,
                                              const PolarizationCheck& check) {
  return compact_polarization_check(decompose(a).eigenvalues, check);
}

WeakDiscreteSpectrumReport weak_discrete_spectrum_certify(
    const FamilySample& sample, const std::vector<double>& b_levels,
    const PolarizationCheck& check, const WeakDiscreteSpectrumOptions& options) {
  check.validate();
  for (double b : b_levels) {
    if (!(b > 0.0 && b < 1.0)) throw InvalidArgument("weak discrete-spectrum levels must lie in (0, 1)");
  }
  WeakDiscreteSpectrumReport out;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out.fibers.push_back(compact_polarization_check(sample.eigenvalues(i), check));
    if (!out.fibers.back().passed && !out.first_unpolarized) out.first_unpolarized = i;
  }
  DiscreteSpectrumOptions ds;
  ds.find.ceiling = options.ceiling.value_or(1.0 - check.eta);
  ds.find.gap_search_span = 1.0;
  ds.sweep_points = options.sweep_points;
  ds.run_definition_route = options.run_definition_route;
  out.levels = discrete_spectrum_certify(sample, b_levels, ds);
  out.passed = !out.first_unpolarized && out.levels.passed;
  return out;
}

CorrespondenceReport transform_correspondence_check(const FamilySample& sample,
                                                    const std::vector<double>& levels,
                                                    const PolarizationCheck& check) {
  CorrespondenceReport out;
  out.sign_check_passed = essential_sign_check(sample, 1).passed;

  // gamma(A_y) decomposed afresh, so the rank comparison is not a relabeling.
  std::vector<HermitianOperator> transformed;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    transformed.emplace_back(bounded_transform(sample.spectrum(i)));
  }
  const FamilySample image(sample.grid(), std::move(transformed));

  std::vector<double> image_levels;
  for (double b : levels) image_levels.push_back(bounded_transform(b));

  // Unbounded span so both searches run over the whole window below the
  // ceiling and the two windows correspond under gamma.
  DiscreteSpectrumOptions ds;
  ds.find.gap_search_span = std::numeric_limits<double>::infinity();
  ds.run_definition_route = false;
  out.discrete = discrete_spectrum_certify(sample, levels, ds);

  WeakDiscreteSpectrumOptions weak;
  weak.ceiling = bounded_transform(out.discrete.ceiling);
  weak.run_definition_route = false;
  out.weak = weak_discrete_spectrum_certify(image, image_levels, check, weak);

  bool all_agree = true;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    CorrespondenceLevel l;
    l.level = levels[k];
    l.transformed_level = image_levels[k];
    l.discrete_passed = out.discrete.levels[k].lemma_passed;
    l.weak_passed = out.weak.levels.levels[k].lemma_passed && !out.weak.first_unpolarized;
    l.agree = l.discrete_passed == l.weak_passed &&
              out.discrete.levels[k].lemma_failures == out.weak.levels.levels[k].lemma_failures;
    all_agree = all_agree && l.agree;
    out.levels.push_back(l);

    for (const auto& cert : out.discrete.levels[k].certificates) {
      for (std::size_t y = cert.range.lo; y <= cert.range.hi; ++y) {
        const int r = window_rank(sample.eigenvalues(y), RealWindow::symmetric(cert.level));
        const int r_image = window_rank(image.eigenvalues(y),
                                        RealWindow::symmetric(bounded_transform(cert.level)));
        ++out.rank_checks;
        if (r != r_image) ++out.rank_mismatches;
      }
    }
  }
  out.consistent = out.sign_check_passed && all_agree && out.rank_mismatches == 0;
  return out;
}

AdaptednessProfile polarized_profile(double eta) {
  return {"polarized", [](double t) { return t; },
          [](double delta) {
            if (!(delta > 0.0 && delta < 0.5)) throw InvalidArgument("delta must lie in (0, 0.5)");
            return 1.0 - delta;
          },
          1.0 - eta};
}

Theorem2Certificate theorem3_certify(const FamilySample& sample, std::size_t x_index,
                                     double delta, double cap, const PolarizationCheck& check,
                                     const FindOptions& find) {
  check.validate();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!compact_polarization_check(sample.eigenvalues(i), check).passed) {
      throw InvalidArgument("fiber " + std::to_string(i) + " is not compactly polarized");
    }
  }
  Theorem2Options opts;
  opts.find = find;
  opts.profile = polarized_profile(check.eta);
  return theorem2_certify(sample, x_index, delta, cap, opts);
}

}  // namespace opfam
