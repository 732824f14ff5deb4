// Acceptance suite: one PASS/FAIL line per criterion with its runtime.
//
//   opfam_acceptance --cli build/tools/opfam --work DIR [--expect-fail 3,5,6]
//
// Exit status is 0 when the set of failing criteria equals --expect-fail
// (empty by default), so a known red criterion stays visible in the output
// without hiding regressions elsewhere, and an unexpected pass is reported.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "opfam/analysis.hpp"
#include "opfam/polarized.hpp"
#include "opfam/spectral_flow.hpp"
#include "support/oracles.hpp"

using namespace opfam;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      notes.push_back("violated: " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

FamilySpec dirac(int modes) {
  FamilySpec s;
  s.kind = FamilyKind::DiracCircle;
  s.modes = modes;
  return s;
}

FamilySpec random_path(int dim, std::uint64_t seed) {
  FamilySpec s;
  s.kind = FamilyKind::RandomCrossings;
  s.dim = dim;
  s.seed = seed;
  return s;
}

const std::vector<std::size_t> kBasePoints{20, 60, 100, 140, 180};

// 1. Functional calculus on random Hermitian matrices.
Outcome functional_calculus() {
  Outcome out;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> dims(1, 16);
  double worst_recon = 0.0, worst_resolvent = 0.0, worst_odd = 0.0, max_gamma_norm = 0.0;
  bool recon_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dims(rng);
    const HermitianOperator a(oracle::random_hermitian(rng, n, 5.0));
    const auto d = decompose(a);
    const double recon = reconstruction_error(a, d);
    recon_ok = recon_ok && recon <= 1e-9 * n * (1.0 + d.max_abs_eigenvalue());
    worst_recon = std::max(worst_recon, recon);

    double expect = 0.0;
    for (Index k = 0; k < n; ++k) expect = std::max(expect, 1.0 / std::sqrt(1.0 + d.eigenvalues(k) * d.eigenvalues(k)));
    worst_resolvent = std::max(worst_resolvent, std::abs(operator_norm(resolvent_at_i(d)) - expect));

    const auto g = bounded_transform(a);
    max_gamma_norm = std::max(max_gamma_norm, operator_norm(g.matrix()));
    worst_odd = std::max(worst_odd, (bounded_transform(-a).matrix() + g.matrix()).cwiseAbs().maxCoeff());
  }
  out.require(recon_ok, "reconstruction error <= 1e-9 dim (1 + max|lambda|)");
  out.require(worst_resolvent <= 1e-9, "resolvent norm within 1e-9 of max (1 + lambda^2)^(-1/2)");
  out.require(max_gamma_norm < 1.0, "||gamma(A)|| < 1");
  out.require(worst_odd <= 1e-12, "gamma(-A) = -gamma(A) within 1e-12");
  out.note("max reconstruction " + fmt("%.2e", worst_recon) + ", resolvent " + fmt("%.2e", worst_resolvent) +
           ", ||gamma(A)|| " + fmt("%.6f", max_gamma_norm) + ", oddness " + fmt("%.2e", worst_odd));
  return out;
}

// 2. Definitional sweep route agrees with the adapted-pair route.
Outcome route_equivalence(const fs::path& work) {
  Outcome out;
  std::vector<std::pair<std::string, FamilySample>> samples;
  samples.emplace_back("dirac_circle", sample(dirac(20), ParameterGrid::linspace(-0.49, 0.49, 201)));
  FamilySpec h;
  h.kind = FamilyKind::HarmonicPerturbed;
  h.dim = 12;
  samples.emplace_back("harmonic_perturbed", sample(h, ParameterGrid::linspace(0.0, 1.0, 101)));
  FamilySpec t;
  t.kind = FamilyKind::TangentBlowup;
  samples.emplace_back("tangent_blowup", sample(t, ParameterGrid::excluding(0.1, 0.9, 200, 0.5, 0.02)));
  FamilySpec l;
  l.kind = FamilyKind::LinearCrossing;
  l.dim = 5;
  const auto crossing = sample(l, ParameterGrid::linspace(0.0, 1.0, 41));
  samples.emplace_back("linear_crossing", crossing);
  samples.emplace_back("random_crossings", sample(random_path(8, 7), ParameterGrid::linspace(0.0, 1.0, 101)));
  save_matrix_path(crossing, work / "path.json");
  FamilySpec f;
  f.kind = FamilyKind::MatrixPathFile;
  f.path = work / "path.json";
  samples.emplace_back("matrix_path_file", sample(f, std::nullopt));
  for (int i = 0; i < 50; ++i) {
    const int dim = 2 + i % 9;
    const std::size_t points = 20 + static_cast<std::size_t>(i * 37) % 81;
    samples.emplace_back("random path " + std::to_string(i),
                         sample(random_path(dim, 1000 + static_cast<std::uint64_t>(i)),
                                ParameterGrid::linspace(0.0, 1.0, points)));
  }

  std::size_t levels = 0, both_pass = 0, both_fail = 0, disagree = 0;
  for (const auto& [name, s] : samples) {
    const double ceiling = truncation_ceiling(s);
    const std::vector<double> b{0.2 * ceiling, 0.5 * ceiling, 0.8 * ceiling, 1.2 * ceiling};
    const auto rep = discrete_spectrum_certify(s, b);
    for (const auto& lv : rep.levels) {
      ++levels;
      const bool agree = lv.definition_checked && lv.lemma_passed == lv.definition_passed &&
                         lv.lemma_failures == lv.definition_failures;
      if (!agree) {
        ++disagree;
        out.note(name + ": routes disagree at b = " + fmt("%.6g", lv.b));
      } else if (lv.lemma_passed) {
        ++both_pass;
      } else {
        ++both_fail;
      }
    }
  }
  out.require(disagree == 0, "routes agree on pass/fail and failure locations");
  out.note(std::to_string(samples.size()) + " samples, " + std::to_string(levels) + " levels: " +
           std::to_string(both_pass) + " pass on both routes, " + std::to_string(both_fail) +
           " fail on both routes");
  return out;
}

// 3. Graph-topology certificates.
Outcome theorem1_certificates() {
  Outcome out;
  const auto s = sample(dirac(20), ParameterGrid::linspace(-0.49, 0.49, 201));
  for (double delta : {0.2, 0.1, 0.05}) {
    std::size_t ok = 0;
    std::string first_error;
    double worst = 0.0;
    for (std::size_t x : kBasePoints) {
      try {
        const auto c = theorem1_certify(s, x, delta);
        if (c.tail_bound < delta && c.b_modulus < delta && c.final_bound < 3 * delta) ++ok;
        worst = std::max(worst, c.final_bound);
      } catch (const Error& e) {
        if (first_error.empty()) first_error = e.what();
      }
    }
    out.require(ok == kBasePoints.size(), "certificate returned at every base point for delta = " + fmt("%g", delta));
    out.note("delta " + fmt("%g", delta) + ": " + std::to_string(ok) + "/5 certificates" +
             (ok ? ", max final_bound " + fmt("%.4f", worst) : std::string()) +
             (first_error.empty() ? std::string() : "; " + first_error));
  }
  return out;
}

// 4. Riesz-topology certificates.
Outcome theorem2_certificates() {
  Outcome out;
  const auto s = sample(dirac(20), ParameterGrid::linspace(-0.49, 0.49, 201));
  for (double delta : {0.2, 0.1}) {
    std::size_t ok = 0;
    double worst_final = 0.0, worst_identity = 0.0, worst_decomp = 0.0;
    for (std::size_t x : kBasePoints) {
      try {
        const auto c = theorem2_certify(s, x, delta, 0.5);
        bool good = c.decomposition_residual <= 1e-9 && c.ineq2_plus < delta && c.ineq2_minus < delta &&
                    c.ineq3_inner < delta && c.ineq3_minus < delta && c.ineq3_plus < delta &&
                    c.final_bound < 7 * delta && c.partition_residual <= 1e-14;
        const Matrix id = Matrix::Identity(s.dim(), s.dim());
        for (const auto& p : c.points) {
          worst_identity = std::max(worst_identity, (p.q + p.q_plus + p.q_minus - id).cwiseAbs().maxCoeff());
        }
        good = good && !c.points.empty() && worst_identity <= 1e-14;
        if (good) ++ok;
        worst_final = std::max(worst_final, c.final_bound);
        worst_decomp = std::max(worst_decomp, c.decomposition_residual);
      } catch (const Error& e) {
        out.note("delta " + fmt("%g", delta) + " x_index " + std::to_string(x) + ": " + e.what());
      }
    }
    out.require(ok == kBasePoints.size(), "every inequality at every base point for delta = " + fmt("%g", delta));
    out.note("delta " + fmt("%g", delta) + ": " + std::to_string(ok) + "/5 certificates, max final_bound " +
             fmt("%.4f", worst_final) + ", decomposition residual " + fmt("%.1e", worst_decomp) +
             ", q + q+ + q- - 1 " + fmt("%.1e", worst_identity));
  }
  return out;
}

// 5. Graph vs Riesz negative control at the tangent pole.
Outcome negative_control() {
  Outcome out;
  FamilySpec t;
  t.kind = FamilyKind::TangentBlowup;
  const auto s = sample(t, ParameterGrid::excluding(0.1, 0.9, 200, 0.5, 0.02));
  const std::size_t pole = 99;
  const double a = std::tan(0.48 * std::numbers::pi);
  const double b = std::tan(0.52 * std::numbers::pi);
  const double graph = continuity_modulus(s, Metric::Graph).edges[pole].value;
  const double riesz = continuity_modulus(s, Metric::Riesz).edges[pole].value;
  const double graph_oracle = oracle::graph_scalar(a, b);
  const double riesz_oracle = oracle::riesz_scalar(a, b);
  out.require(std::abs(graph - graph_oracle) <= 1e-9, "graph modulus matches the scalar formula");
  out.require(std::abs(riesz - riesz_oracle) <= 1e-9, "Riesz modulus matches the scalar formula");
  out.require(graph <= 0.05, "graph modulus across the pole edge <= 0.05");
  out.require(riesz >= 1.9, "Riesz modulus across the pole edge >= 1.9");
  out.note("pole edge: graph " + fmt("%.6f", graph) + " (scalar " + fmt("%.6f", graph_oracle) + "), Riesz " +
           fmt("%.6f", riesz) + " (scalar " + fmt("%.6f", riesz_oracle) + ")");

  const auto strict = strict_adaptedness_certify(s, pole, 0.5, 0.5);
  out.require(!strict.passed && strict.modulus >= 1.0 && strict.worst_edge == std::optional<std::size_t>(pole),
              "strict adaptedness fails at the pole edge with modulus >= 1");
  out.note("strict adaptedness modulus " + fmt("%.6f", strict.modulus));
  bool refused = false;
  try {
    theorem2_certify(s, pole, 0.1, 0.5);
  } catch (const StrictAdaptednessFailed&) {
    refused = true;
  } catch (const Error&) {
  }
  out.require(refused, "Riesz certificate refused with StrictAdaptednessFailed");
  return out;
}

// 6. Spectral flow by tracking and by partition.
Outcome spectral_flow() {
  Outcome out;
  const auto d = sample(dirac(100), ParameterGrid::linspace(-0.49, 0.49, 401));
  const int tracked = flow_by_tracking(d).flow;
  const int partitioned = flow_by_partition(d).flow;
  out.require(tracked == 1 && partitioned == 1, "dirac circle flow is 1 by both methods");
  out.note("dirac circle (dim 201): tracking " + std::to_string(tracked) + ", partition " +
           std::to_string(partitioned));

  std::size_t agree = 0, reversal = 0, additive = 0, nonzero = 0;
  for (int i = 0; i < 100; ++i) {
    const int dim = 1 + (i % 12);
    const std::size_t points = 40 + static_cast<std::size_t>(i * 53) % 161;
    const auto s = sample(random_path(dim, 500 + static_cast<std::uint64_t>(i)), ParameterGrid::linspace(0.0, 1.0, points));
    try {
      const int t = flow_by_tracking(s).flow;
      const int p = flow_by_partition(s).flow;
      if (t == p) ++agree;
      if (t != 0) ++nonzero;
      if (flow_by_tracking(s.reversed()).flow == -t && flow_by_partition(s.reversed()).flow == -p) ++reversal;
      const std::size_t mid = points / 2;
      const auto first = s.slice({0, mid});
      const auto second = s.slice({mid, points - 1});
      if (flow_by_partition(first).flow + flow_by_partition(second).flow == p &&
          flow_by_tracking(concatenate(first, second)).flow == t) {
        ++additive;
      }
    } catch (const Error& e) {
      out.note("random family " + std::to_string(i) + " (dim " + std::to_string(dim) + ", level ceiling " +
               fmt("%.2e", truncation_ceiling(s)) + "): " + e.what());
    }
  }
  out.require(agree == 100, "methods agree on 100 random families");
  out.require(reversal == 100, "reversal negates");
  out.require(additive == 100, "concatenation adds");
  out.note("random families: " + std::to_string(agree) + " agree, " + std::to_string(reversal) +
           " reverse, " + std::to_string(additive) + " add, " + std::to_string(nonzero) + " with nonzero flow");
  return out;
}

// 7. Correspondence under the bounded transform.
Outcome correspondence() {
  Outcome out;
  std::mt19937_64 rng(7);
  std::size_t checks = 0, mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 15;
    const HermitianOperator a(oracle::random_hermitian(rng, n, 6.0));
    const auto ev = decompose(a).eigenvalues;
    const auto gev = decompose(bounded_transform(a)).eigenvalues;
    const auto candidates = admissible_levels(ev, 0.0, 2.0 * ev.cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k < 5; ++k) {
      const double c = candidates[k % candidates.size()].level * (1.0 + 1e-3 * static_cast<double>(k / candidates.size()));
      if (window_margin(ev, RealWindow::symmetric(c)) <= 1e-8) continue;
      ++checks;
      if (window_rank(ev, RealWindow::symmetric(c)) != window_rank(gev, RealWindow::symmetric(oracle::gamma(c)))) {
        ++mismatches;
      }
    }
  }
  out.require(checks == 250 && mismatches == 0, "rank identity on 50 matrices x 5 levels");
  out.note(std::to_string(checks) + " rank checks, " + std::to_string(mismatches) + " mismatches");

  const auto s = sample(dirac(20), ParameterGrid::linspace(-0.49, 0.49, 201));
  const auto pass = transform_correspondence_check(s, {1.4}, PolarizationCheck::defaults_for(s.dim()));
  out.require(pass.consistent && pass.levels[0].discrete_passed && pass.levels[0].weak_passed,
              "dirac circle passes on both sides");
  out.note("dirac circle: " + std::to_string(pass.rank_checks) + " certificate rank checks, " +
           std::to_string(pass.rank_mismatches) + " mismatches");

  // Level above the truncation ceiling: no admissible gap on either side.
  const auto small = sample(dirac(5), ParameterGrid::linspace(-0.49, 0.49, 51));
  const auto fail = transform_correspondence_check(small, {6.0}, PolarizationCheck::defaults_for(small.dim()));
  const auto& lv = fail.levels[0];
  out.require(!lv.discrete_passed && !lv.weak_passed && lv.agree && fail.rank_mismatches == 0,
              "ceiling-violating sample fails on both sides");
  out.note("ceiling-violating sample: discrete " + std::string(lv.discrete_passed ? "pass" : "fail") +
           ", weak " + (lv.weak_passed ? "pass" : "fail"));
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. Two analyze runs give byte-identical reports.
Outcome reproducibility(const std::string& cli, const fs::path& work) {
  Outcome out;
  const auto cfg = work / "demo_dirac_circle.json";
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" + (work / "cli.log").string() + "\" 2>&1";
    return std::system(cmd.c_str());
  };
  out.require(run("demo dirac_circle --quiet --output-dir \"" + work.string() + "\"") == 0, "demo config written");
  const int rc_a = run("analyze \"" + cfg.string() + "\" --quiet --output-dir \"" + (work / "run_a").string() + "\"");
  const int rc_b = run("analyze \"" + cfg.string() + "\" --quiet --threads 2 --output-dir \"" +
                       (work / "run_b").string() + "\"");
  out.note("analyze exit statuses " + std::to_string(rc_a) + ", " + std::to_string(rc_b));
  const auto a = slurp(work / "run_a" / "report.json");
  const auto b = slurp(work / "run_b" / "report.json");
  out.require(!a.empty() && a == b, "report.json byte-identical");
  out.note("report.json " + std::to_string(a.size()) + " bytes");
  return out;
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;  ///< 0: no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opfam acceptance suite"};
  std::string cli;
  std::string work_dir = "acceptance-work";
  std::vector<int> expect_fail;
  app.add_option("--cli", cli, "Path to the opfam command-line tool")->required();
  app.add_option("--work", work_dir, "Scratch directory");
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const fs::path work(work_dir);
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<Criterion> criteria{
      {1, "functional calculus", 10, functional_calculus},
      {2, "sweep and adapted-pair routes agree", 60, [&] { return route_equivalence(work); }},
      {3, "graph-topology certificates", 30, theorem1_certificates},
      {4, "Riesz-topology certificates", 30, theorem2_certificates},
      {5, "graph vs Riesz negative control", 10, negative_control},
      {6, "spectral flow", 120, spectral_flow},
      {7, "bounded-transform correspondence", 30, correspondence},
      {8, "byte-identical reports", 0, [&] { return reproducibility(cli, work); }},
  };

  std::set<int> failed;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.passed = false;
      outcome.note(std::string("unexpected exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && seconds >= c.limit_seconds) {
      outcome.passed = false;
      outcome.note("runtime limit " + fmt("%g", c.limit_seconds) + " s exceeded");
    }
    if (!outcome.passed) failed.insert(c.id);
    std::printf("%s criterion %d: %s (%.2f s)\n", outcome.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), seconds);
    for (const auto& n : outcome.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
  }

  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
  if (failed == expected) {
    if (!expected.empty()) std::printf("failures match the documented red criteria\n");
    return 0;
  }
  for (int id : failed) {
    if (!expected.count(id)) std::printf("criterion %d failed unexpectedly\n", id);
  }
  for (int id : expected) {
    if (!failed.count(id)) std::printf("criterion %d passed but is listed as expected to fail\n", id);
  }
  return 1;
}
