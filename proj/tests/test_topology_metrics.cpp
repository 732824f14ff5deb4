#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "opfam/topology_metrics.hpp"
#include "support/oracles.hpp"

using namespace opfam;

namespace {

FamilySample constant_sample(const std::vector<double>& diag, std::size_t points = 7) {
  std::vector<HermitianOperator> ops(points, HermitianOperator::diagonal(diag));
  return FamilySample(ParameterGrid::linspace(0.0, 1.0, points), ops);
}

FamilySample dirac_sample(int modes, std::size_t points) {
  FamilySpec s;
  s.kind = FamilyKind::DiracCircle;
  s.modes = modes;
  return sample(s, ParameterGrid::linspace(-0.49, 0.49, points));
}

FamilySample tangent_sample() {
  FamilySpec s;
  s.kind = FamilyKind::TangentBlowup;
  return sample(s, ParameterGrid::excluding(0.1, 0.9, 200, 0.5, 0.02));
}

Matrix random_unitary(std::mt19937_64& rng, int n) {
  return decompose(HermitianOperator(oracle::random_hermitian(rng, n))).eigenvectors;
}

std::vector<double> diag_of(const FamilySample& s, std::size_t i) {
  std::vector<double> d;
  for (Index k = 0; k < s.dim(); ++k) d.push_back(s.op(i).matrix()(k, k).real());
  return d;
}

}  // namespace

TEST_CASE("graph_distance examples") {
  const auto a = HermitianOperator::diagonal({0.3, -2.0});
  CHECK(graph_distance(a, a) == 0.0);
  CHECK(graph_distance(HermitianOperator::diagonal({0}), HermitianOperator::diagonal({1})) ==
        doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  const double big = graph_distance(HermitianOperator::diagonal({1e6}), HermitianOperator::diagonal({-1e6}));
  CHECK(big == doctest::Approx(oracle::graph_scalar(1e6, -1e6)).epsilon(1e-9));
  CHECK(big == doctest::Approx(2e-6).epsilon(1e-6));
  CHECK_THROWS_AS(graph_distance(HermitianOperator::zero(2), HermitianOperator::zero(3)), InvalidArgument);
}

TEST_CASE("riesz_distance examples") {
  const auto a = HermitianOperator::diagonal({0.3, -2.0});
  CHECK(riesz_distance(a, a) == 0.0);
  CHECK(riesz_distance(HermitianOperator::diagonal({1e6}), HermitianOperator::diagonal({-1e6})) ==
        doctest::Approx(2.0).epsilon(1e-9));
  CHECK(riesz_distance(HermitianOperator::diagonal({1}), HermitianOperator::diagonal({-1})) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("property: commuting pairs match the scalar formulas") {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 8;
    const Matrix v = random_unitary(rng, n);
    std::vector<double> a(n), b(n);
    for (int k = 0; k < n; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
    }
    auto build = [&](const std::vector<double>& d) {
      Eigen::VectorXcd diag(n);
      for (int k = 0; k < n; ++k) diag(k) = d[k];
      return HermitianOperator(Matrix(v * diag.asDiagonal() * v.adjoint()));
    };
    const auto ha = build(a), hb = build(b);
    CHECK(std::abs(graph_distance(ha, hb) - oracle::graph_diag(a, b)) <= 1e-9);
    CHECK(std::abs(riesz_distance(ha, hb) - oracle::riesz_diag(a, b)) <= 1e-9);
    CHECK(graph_distance(ha, hb) == doctest::Approx(graph_distance(hb, ha)).epsilon(1e-12));
  }
}

TEST_CASE("continuity_modulus") {
  SUBCASE("constant family") {
    for (Metric m : {Metric::Graph, Metric::Riesz}) {
      const auto mod = continuity_modulus(constant_sample({-1, 2}), m);
      CHECK(mod.max == 0.0);
      CHECK(mod.edges.size() == 6);
    }
  }
  SUBCASE("tangent blowup across the pole") {
    const auto s = tangent_sample();
    const double a = std::tan(0.48 * std::numbers::pi);
    const double b = std::tan(0.52 * std::numbers::pi);
    const auto graph = continuity_modulus(s, Metric::Graph);
    const auto riesz = continuity_modulus(s, Metric::Riesz);
    const auto& g_edge = graph.edges[99];
    CHECK(g_edge.x_left == doctest::Approx(0.48));
    CHECK(g_edge.x_right == doctest::Approx(0.52));
    CHECK(g_edge.value == doctest::Approx(oracle::graph_scalar(a, b)).epsilon(1e-9));
    CHECK(riesz.edges[99].value == doctest::Approx(oracle::riesz_scalar(a, b)).epsilon(1e-9));
    CHECK(riesz.edges[99].value > 1.99);
    CHECK(riesz.max == riesz.edges[99].value);
    // Everywhere else both moduli come from one moving diagonal entry.
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      CHECK(graph.edges[i].value ==
            doctest::Approx(oracle::graph_diag(diag_of(s, i), diag_of(s, i + 1))).epsilon(1e-8));
    }
  }
}

TEST_CASE("theorem1_certify") {
  SUBCASE("constant family: tail bound from the scalar formula") {
    const auto s = constant_sample({-5, -2, 2, 5});
    const auto c = theorem1_certify(s, 3, 0.3);
    CHECK(c.level_c > 1 / 0.3);
    CHECK(c.tail_bound == doctest::Approx(1 / std::sqrt(26.0)).epsilon(1e-12));
    CHECK(c.b_modulus == 0.0);
    CHECK(c.final_bound == 0.0);
    CHECK(c.range == s.full_range());
    CHECK(c.truncated_resolvents.size() == s.size());
  }
  SUBCASE("dirac circle, delta 0.2") {
    const auto s = dirac_sample(20, 201);
    for (std::size_t x : {std::size_t{40}, std::size_t{100}, std::size_t{160}}) {
      const auto c = theorem1_certify(s, x, 0.2);
      CHECK(c.level_c > 5.0);
      CHECK(c.tail_bound < 0.2);
      CHECK(c.b_modulus < 0.2);
      CHECK(c.final_bound < 0.6);
      CHECK(c.range.contains(x));
      // Diagonal family: the final bound is a scalar maximum.
      double expect = 0.0;
      for (std::size_t y = c.range.lo; y <= c.range.hi; ++y) {
        expect = std::max(expect, oracle::graph_diag(diag_of(s, y), diag_of(s, x)));
      }
      CHECK(c.final_bound == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  SUBCASE("linear crossing: ceiling decides") {
    FamilySpec spec;
    spec.kind = FamilyKind::LinearCrossing;
    spec.dim = 3;
    const auto small = sample(spec, ParameterGrid::linspace(0, 1, 21));
    CHECK_THROWS_AS(theorem1_certify(small, 10, 0.5), NoGap);
    spec.dim = 9;
    const auto large = sample(spec, ParameterGrid::linspace(0, 1, 21));
    const auto c = theorem1_certify(large, 10, 0.5);
    CHECK(c.level_c > 2.0);
    CHECK(c.final_bound < 1.5);
  }
  SUBCASE("embedding limit and bad input") {
    Theorem1Options opts;
    opts.embed_dim_limit = 0;
    CHECK(theorem1_certify(constant_sample({-5, 5}), 1, 0.3, opts).truncated_resolvents.empty());
    CHECK_THROWS_AS(theorem1_certify(constant_sample({-5, 5}), 1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(theorem1_certify(constant_sample({-5, 5}), 99, 0.3), InvalidArgument);
  }
}

TEST_CASE("strict_adaptedness_certify") {
  SUBCASE("constant family") {
    const auto s = strict_adaptedness_certify(constant_sample({-1, 2}), 3, 0.5, 0.1);
    CHECK(s.passed);
    CHECK(s.modulus == 0.0);
  }
  SUBCASE("dirac circle keeps its positive projection") {
    const auto s = strict_adaptedness_certify(dirac_sample(5, 99), 49, 0.4, 0.1);
    CHECK(s.passed);
    CHECK(s.modulus < 1e-12);
  }
  SUBCASE("random path: modulus shrinks with the grid step") {
    FamilySpec spec;
    spec.kind = FamilyKind::RandomCrossings;
    spec.dim = 6;
    spec.seed = 8;
    const auto coarse = sample(spec, ParameterGrid::linspace(0.0, 0.2, 21));
    const auto fine = sample(spec, ParameterGrid::linspace(0.0, 0.2, 81));
    const double eps = admissible_levels(coarse.eigenvalues(10), 0.0, 1.0).front().level;
    const auto a = strict_adaptedness_certify(coarse, 10, eps, 1.0);
    const auto b = strict_adaptedness_certify(fine, 40, eps, 1.0);
    if (a.range == coarse.full_range() && b.range == fine.full_range()) {
      CHECK(b.modulus < a.modulus);
    }
  }
  SUBCASE("tangent blowup across the pole") {
    const auto s = strict_adaptedness_certify(tangent_sample(), 99, 0.5, 0.5);
    CHECK_FALSE(s.passed);
    CHECK(s.modulus >= 1.0 - 1e-12);
    CHECK(s.worst_edge == std::size_t{99});
  }
  SUBCASE("edge on the spectrum") {
    CHECK_THROWS_AS(strict_adaptedness_certify(constant_sample({-1, 1}), 0, 1.0, 0.5), EdgeOnSpectrum);
  }
}

TEST_CASE("riesz_level_threshold") {
  for (double d : {0.01, 0.1, 0.2, 0.3, 0.49}) {
    CHECK(oracle::gamma(riesz_level_threshold(d)) == doctest::Approx(1 - d).epsilon(1e-14));
  }
  CHECK(riesz_level_threshold(0.1) == doctest::Approx(0.9 / std::sqrt(0.19)));
  CHECK_THROWS_AS(riesz_level_threshold(0.5), InvalidArgument);
  CHECK_THROWS_AS(riesz_level_threshold(0.0), InvalidArgument);
}

TEST_CASE("theorem2_certify") {
  SUBCASE("constant family") {
    const auto c = theorem2_certify(constant_sample({-5, -2, 2, 5}), 3, 0.2, 0.5);
    CHECK(c.level_c > riesz_level_threshold(0.2));
    CHECK(c.ineq3_inner == 0.0);
    CHECK(c.ineq3_minus == 0.0);
    CHECK(c.ineq3_plus == 0.0);
    CHECK(c.final_bound == 0.0);
    CHECK(c.ineq2_plus == doctest::Approx(1 - oracle::gamma(2.0)).epsilon(1e-12));
  }
  SUBCASE("dirac circle, delta 0.1") {
    const auto s = dirac_sample(20, 201);
    const auto c = theorem2_certify(s, 100, 0.1, 0.5);
    CHECK(oracle::gamma(c.level_c) > 0.9);
    CHECK(c.level_threshold == doctest::Approx(2.0647416048350555).epsilon(1e-12));
    CHECK(c.epsilon > 0.0);
    CHECK(c.epsilon < c.level_c);
    CHECK(c.decomposition_residual <= 1e-9);
    CHECK(c.partition_residual <= 1e-14);
    CHECK(c.positive_identity_residual <= 1e-9);
    CHECK(c.ineq2_plus < 0.1);
    CHECK(c.ineq2_minus < 0.1);
    CHECK(std::max({c.ineq3_inner, c.ineq3_minus, c.ineq3_plus}) < 0.1);
    CHECK(c.final_bound < 0.7);
    REQUIRE(c.points.size() == c.range.size());
    for (const auto& p : c.points) {
      const Matrix id = Matrix::Identity(s.dim(), s.dim());
      CHECK((p.q + p.q_plus + p.q_minus - id).cwiseAbs().maxCoeff() <= 1e-15);
    }
    // Riesz distance on the range against the scalar formula.
    double expect = 0.0;
    for (std::size_t y = c.range.lo; y <= c.range.hi; ++y) {
      expect = std::max(expect, oracle::riesz_diag(diag_of(s, y), diag_of(s, 100)));
    }
    CHECK(c.final_bound == doctest::Approx(expect).epsilon(1e-9));
  }
  SUBCASE("tangent blowup is rejected") {
    try {
      theorem2_certify(tangent_sample(), 99, 0.1, 0.5);
      FAIL("expected StrictAdaptednessFailed");
    } catch (const StrictAdaptednessFailed& e) {
      CHECK(e.x_index() == 99);
      CHECK(e.best_modulus() >= 1.0 - 1e-12);
    }
  }
  SUBCASE("delta outside (0, 1/2)") {
    CHECK_THROWS_AS(theorem2_certify(constant_sample({-5, 5}), 0, 0.5, 0.5), InvalidArgument);
    CHECK_THROWS_AS(theorem2_certify(constant_sample({-5, 5}), 0, 0.7, 0.5), InvalidArgument);
  }
}

TEST_CASE("property: returned certificates satisfy their bounds") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    FamilySpec spec;
    spec.kind = FamilyKind::DiracCircle;
    spec.modes = 12;
    spec.flux = {0.1 * static_cast<double>(seed) - 0.3, 0.5};
    const auto s = sample(spec, ParameterGrid::linspace(-0.4, 0.4, 81));
    for (double delta : {0.3, 0.2}) {
      try {
        const auto c1 = theorem1_certify(s, 40, delta);
        CHECK(c1.tail_bound < delta);
        CHECK(c1.b_modulus < delta);
        CHECK(c1.final_bound < 3 * delta);
      } catch (const NoGap&) {
      }
      try {
        const auto c2 = theorem2_certify(s, 40, delta, 0.5);
        CHECK(c2.ineq2_plus < delta);
        CHECK(c2.ineq2_minus < delta);
        CHECK(c2.final_bound < 7 * delta);
      } catch (const NoGap&) {
      }
    }
  }
}

TEST_CASE("property: shifted family is certified with the same delta") {
  const auto s = dirac_sample(20, 101);
  const auto base = theorem1_certify(s, 50, 0.2);
  for (double lambda : {-1.3, 0.4, 2.7}) {
    const auto shifted = s.shifted(lambda);
    for (std::size_t y = base.range.lo; y <= base.range.hi; ++y) {
      CHECK(std::isfinite(graph_distance(shifted.spectrum(y), shifted.spectrum(50))));
    }
    const auto c = theorem1_certify(shifted, 50, 0.2);
    CHECK(c.final_bound < 0.6);
  }
}
