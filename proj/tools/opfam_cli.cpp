// opfam: analyze operator families from a JSON config.
//
//   opfam analyze config.json [--output-dir DIR] [--threads N] [--quiet]
//   opfam validate config.json
//   opfam demo dirac_circle [--output-dir DIR]
//
// Exit status: 0 when every requested certificate passes, 1 on a numerical
// failure, 2 on a config schema violation.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "opfam/analysis.hpp"

namespace {

constexpr int kNumericalFailure = 1;
constexpr int kSchemaViolation = 2;

void print_summary(const opfam::RunSummary& summary, const std::filesystem::path& dir) {
  const auto& report = summary.report;
  if (report.contains("sample_error")) {
    std::printf("sampling failed: %s\n", report["sample_error"]["message"].get<std::string>().c_str());
  }
  for (const auto& a : report["analyses"]) {
    std::printf("[%s] analyses[%zu] %s", a["passed"].get<bool>() ? "PASS" : "FAIL",
                a["index"].get<std::size_t>(), a["kind"].get<std::string>().c_str());
    if (a.contains("error")) std::printf(": %s", a["error"]["message"].get<std::string>().c_str());
    if (a.contains("result") && a["result"].contains("flow") && !a["result"]["flow"].is_null()) {
      std::printf(" (flow %d)", a["result"]["flow"].get<int>());
    }
    std::printf("\n");
  }
  std::printf("report written to %s\n", (dir / "report.json").string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certificates for continuity and spectral flow of self-adjoint operator families"};
  app.set_version_flag("--version", OPFAM_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  int threads = 1;
  bool quiet = false;
  std::string demo_kind;

  auto* analyze = app.add_subcommand("analyze", "Run every analysis in a config");
  analyze->add_option("config", config_path, "Config file (JSON)")->required();
  analyze->add_option("--output-dir", output_dir, "Directory for report.json and CSV files");
  analyze->add_option("--threads", threads, "Worker thread cap")->check(CLI::Range(1, 1024));
  analyze->add_flag("--quiet", quiet, "Print nothing on success");

  auto* validate = app.add_subcommand("validate", "Check a config against the schema");
  validate->add_option("config", config_path, "Config file (JSON)")->required();
  validate->add_flag("--quiet", quiet, "Print nothing on success");

  auto* demo = app.add_subcommand("demo", "Write a ready-made config for a family kind");
  demo->add_option("kind", demo_kind, "Family kind")->required();
  demo->add_option("--output-dir", output_dir, "Directory for the config (default: .)");
  demo->add_flag("--quiet", quiet, "Print nothing on success");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kSchemaViolation;
  }

  try {
    if (*demo) {
      const auto kind = opfam::parse_family_kind(demo_kind);
      if (!kind) {
        std::fprintf(stderr, "unknown family kind '%s'\n", demo_kind.c_str());
        return kSchemaViolation;
      }
      const std::filesystem::path dir = output_dir.empty() ? "." : output_dir;
      std::filesystem::create_directories(dir);
      if (*kind == opfam::FamilyKind::MatrixPathFile) {
        // A small crossing path to go with the config.
        opfam::FamilySpec spec;
        spec.kind = opfam::FamilyKind::LinearCrossing;
        spec.dim = 4;
        const auto path = opfam::sample(spec, opfam::ParameterGrid::linspace(0.0, 1.0, 41));
        opfam::save_matrix_path(path, dir / "matrix_path.json");
      }
      const auto file = dir / ("demo_" + demo_kind + ".json");
      std::ofstream out(file);
      out << opfam::dump_canonical(opfam::demo_config(*kind));
      if (!out) throw opfam::Error("cannot write " + file.string());
      if (!quiet) std::printf("%s\n", file.string().c_str());
      return 0;
    }

    const auto config = opfam::load_config(config_path);
    if (*validate) {
      opfam::validate_against_grid(config, opfam::configured_grid_size(config));
      if (!quiet) std::printf("%s: ok\n", config_path.c_str());
      return 0;
    }

    opfam::RunOptions run;
    run.threads = threads;
    if (!output_dir.empty()) {
      run.output_dir = output_dir;
    } else if (config.output_dir) {
      run.output_dir = *config.output_dir;
    }
    const auto summary = opfam::run_analysis(config, run);
    if (!quiet || !summary.passed) print_summary(summary, run.output_dir);
    return summary.passed ? 0 : kNumericalFailure;
  } catch (const opfam::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kSchemaViolation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalFailure;
  }
}
