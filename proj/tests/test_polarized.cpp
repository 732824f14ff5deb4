#include <doctest.h>

#include <random>

#include "opfam/polarized.hpp"
#include "support/oracles.hpp"

using namespace opfam;

namespace {

FamilySample constant_sample(const std::vector<double>& diag, std::size_t points = 5) {
  std::vector<HermitianOperator> ops(points, HermitianOperator::diagonal(diag));
  return FamilySample(ParameterGrid::linspace(0.0, 1.0, points), ops);
}

FamilySample dirac_sample(int modes, std::size_t points) {
  FamilySpec s;
  s.kind = FamilyKind::DiracCircle;
  s.modes = modes;
  return sample(s, ParameterGrid::linspace(-0.49, 0.49, points));
}

PolarizationCheck check_with(double eta, int budget) {
  PolarizationCheck c;
  c.eta = eta;
  c.interior_budget = budget;
  return c;
}

}  // namespace

TEST_CASE("compact_polarization_check examples") {
  SUBCASE("exact symmetry") {
    const auto r = compact_polarization_check(HermitianOperator::diagonal({1, -1, 1, -1}), PolarizationCheck{});
    CHECK(r.passed);
    CHECK(r.interior == 0);
    CHECK(r.near_minus == 2);
    CHECK(r.near_plus == 2);
    CHECK(r.norm == doctest::Approx(1.0));
  }
  SUBCASE("bounded transform of a dirac fiber") {
    FamilySpec spec;
    spec.kind = FamilyKind::DiracCircle;
    spec.modes = 5;
    const auto s = sample(spec, ParameterGrid({0.25, 0.3})).bounded_transformed();
    const auto r = compact_polarization_check(s.eigenvalues(0), check_with(0.3, 3));
    CHECK(r.passed);
    // |gamma(t)| < 0.7 exactly for t in {0.25, -0.75}.
    CHECK(r.interior == 2);
    CHECK(r.near_minus + r.near_plus + r.interior == 11);
  }
  SUBCASE("interior spectrum over budget") {
    const auto r = compact_polarization_check(HermitianOperator::diagonal({0.5, -0.5}), check_with(0.1, 1));
    CHECK_FALSE(r.passed);
    CHECK(r.interior == 2);
  }
  SUBCASE("norm above one") {
    CHECK_FALSE(compact_polarization_check(HermitianOperator::diagonal({1.5, -1}), PolarizationCheck{}).passed);
  }
  SUBCASE("one-sided spectrum") {
    CHECK_FALSE(compact_polarization_check(HermitianOperator::diagonal({1, 1}), PolarizationCheck{}).passed);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(check_with(0.0, 0).validate(), InvalidArgument);
    CHECK_THROWS_AS(check_with(0.1, -1).validate(), InvalidArgument);
    CHECK(PolarizationCheck::defaults_for(41).interior_budget == 10);
  }
}

TEST_CASE("weak_discrete_spectrum_certify") {
  SUBCASE("constant family") {
    const auto r = weak_discrete_spectrum_certify(constant_sample({1, -1, 0.2, -0.2}), {0.5, 0.9},
                                                  check_with(0.05, 2));
    CHECK(r.passed);
    CHECK_FALSE(r.first_unpolarized.has_value());
    CHECK(r.levels.ceiling == doctest::Approx(0.95));
    REQUIRE(r.levels.levels.size() == 2);
    for (const auto& lv : r.levels.levels) {
      for (const auto& cert : lv.certificates) {
        CHECK(cert.level > lv.b);
        CHECK(cert.level < 0.95);
      }
    }
  }
  SUBCASE("transformed dirac circle") {
    const auto g = dirac_sample(20, 51).bounded_transformed();
    const auto r = weak_discrete_spectrum_certify(g, {oracle::gamma(1.4)}, PolarizationCheck::defaults_for(g.dim()));
    CHECK(r.passed);
    CHECK(r.levels.routes_agree);
  }
  SUBCASE("level above the ceiling") {
    const auto r = weak_discrete_spectrum_certify(constant_sample({1, -1, 0.2}), {0.96}, check_with(0.05, 1));
    CHECK_FALSE(r.passed);
    CHECK_FALSE(r.levels.levels[0].lemma_passed);
    CHECK(r.levels.levels[0].lemma_failures.size() == 5);
  }
  SUBCASE("spectrum accumulating below a low ceiling") {
    std::vector<double> d{-1, 1};
    for (int k = 0; k < 20; ++k) d.push_back(0.69 + 0.02 * k / 19.0);
    const auto r = weak_discrete_spectrum_certify(constant_sample(d), {0.8}, check_with(0.25, 20));
    CHECK_FALSE(r.first_unpolarized.has_value());
    CHECK_FALSE(r.passed);
    REQUIRE_FALSE(r.levels.levels[0].lemma_failure_reasons.empty());
    CHECK(r.levels.levels[0].lemma_failure_reasons[0].find("no admissible level") != std::string::npos);
  }
  SUBCASE("unpolarized fiber") {
    const auto r = weak_discrete_spectrum_certify(constant_sample({0.5, -1, 1}), {0.7}, check_with(0.1, 0));
    CHECK_FALSE(r.passed);
    CHECK(r.first_unpolarized == std::size_t{0});
  }
  SUBCASE("levels outside (0, 1)") {
    CHECK_THROWS_AS(weak_discrete_spectrum_certify(constant_sample({1, -1}), {1.0}, PolarizationCheck{}),
                    InvalidArgument);
  }
}

TEST_CASE("transform_correspondence_check") {
  SUBCASE("dirac circle") {
    const auto s = dirac_sample(20, 51);
    const auto r = transform_correspondence_check(s, {1.4}, PolarizationCheck::defaults_for(s.dim()));
    CHECK(r.sign_check_passed);
    REQUIRE(r.levels.size() == 1);
    CHECK(r.levels[0].transformed_level == doctest::Approx(oracle::gamma(1.4)).epsilon(1e-15));
    CHECK(r.levels[0].discrete_passed);
    CHECK(r.levels[0].weak_passed);
    CHECK(r.rank_checks > 0);
    CHECK(r.rank_mismatches == 0);
    CHECK(r.consistent);
  }
  SUBCASE("constant family") {
    const auto r = transform_correspondence_check(constant_sample({-30, -3, 3, 30}), {1.0, 2.0},
                                                  check_with(0.1, 2));
    CHECK(r.consistent);
    CHECK(r.rank_mismatches == 0);
  }
  SUBCASE("both sides fail together") {
    FamilySpec spec;
    spec.kind = FamilyKind::LinearCrossing;
    spec.dim = 3;
    const auto s = sample(spec, ParameterGrid::linspace(0.0, 1.0, 11));
    const auto r = transform_correspondence_check(s, {5.0}, check_with(0.1, 3));
    REQUIRE(r.levels.size() == 1);
    CHECK_FALSE(r.levels[0].discrete_passed);
    CHECK_FALSE(r.levels[0].weak_passed);
    CHECK(r.levels[0].agree);
  }
}

TEST_CASE("property: window ranks survive the bounded transform") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> level(0.1, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 12;
    const HermitianOperator a(oracle::random_hermitian(rng, n, 4.0));
    const auto d = decompose(a);
    const auto g = decompose(bounded_transform(a));
    const double c = level(rng);
    if (window_margin(d.eigenvalues, RealWindow::symmetric(c)) < 1e-6) continue;
    CHECK(window_rank(d.eigenvalues, RealWindow::symmetric(c)) ==
          window_rank(g.eigenvalues, RealWindow::symmetric(oracle::gamma(c))));
  }
}

TEST_CASE("theorem3_certify") {
  const auto g = dirac_sample(20, 201).bounded_transformed();
  const auto check = PolarizationCheck::defaults_for(g.dim());
  SUBCASE("transformed dirac circle") {
    const auto c = theorem3_certify(g, 100, 0.2, 0.5, check);
    CHECK(c.level_c > 0.8);
    CHECK(c.level_c < 1 - check.eta);
    CHECK(c.level_threshold == doctest::Approx(0.8));
    CHECK(c.ineq2_plus < 0.2);
    CHECK(c.ineq2_minus < 0.2);
    CHECK(c.final_bound < 1.4);
    CHECK(c.range.contains(100));
  }
  SUBCASE("unpolarized fiber is rejected") {
    CHECK_THROWS_AS(theorem3_certify(constant_sample({0.5, -0.5}), 2, 0.1, 0.5, check_with(0.1, 0)),
                    InvalidArgument);
  }
  SUBCASE("threshold above the ceiling") {
    CHECK_THROWS_AS(theorem3_certify(g, 100, 0.1, 0.5, check), NoGap);
  }
  SUBCASE("delta range") {
    CHECK_THROWS_AS(theorem3_certify(g, 100, 0.5, 0.5, check), InvalidArgument);
  }
}
