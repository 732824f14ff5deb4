#pragma once

// Config ingestion and analysis orchestration behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opfam/serialization.hpp"

namespace opfam {

/// Schema violation; `path()` names the offending field, e.g.
/// "analyses[0].params.delta".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct GridSpec {
  std::optional<double> start;
  std::optional<double> end;
  std::size_t points = 0;
  std::optional<double> exclude_center;
  std::optional<double> exclude_half_width;
  std::vector<double> values;  ///< explicit form; empty when start/end/points is used

  ParameterGrid build() const;
  std::size_t size() const noexcept { return values.empty() ? points : values.size(); }
};

enum class AnalysisKind {
  CertifyAdapted,
  DiscreteSpectrum,
  Theorem1,
  Theorem2,
  Flow,
  Polarized,
  Distances,
  Truncation,
};
std::string_view to_string(AnalysisKind kind);

struct AnalysisRequest {
  AnalysisKind kind = AnalysisKind::Flow;
  Json params = Json::object();  ///< validated, defaults filled in
};

struct AnalysisConfig {
  FamilySpec family;
  std::optional<GridSpec> grid;
  std::vector<AnalysisRequest> analyses;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output_dir;
  Json source;  ///< the document as read, echoed into the report
};

/// Static schema checks. Relative matrix file paths resolve against base_dir.
AnalysisConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
AnalysisConfig load_config(const std::filesystem::path& path);

/// parse_config plus checks that need the grid size (grid indices in range).
/// Loads the matrix file for file-backed families.
void validate_against_grid(const AnalysisConfig& config, std::size_t grid_size);
std::size_t configured_grid_size(const AnalysisConfig& config);

struct RunOptions {
  std::filesystem::path output_dir = "opfam-out";
  int threads = 1;
};

struct RunSummary {
  bool passed = false;
  Json report;
  std::vector<std::string> files;  ///< written, relative to the output directory
};

/// Samples the family, runs every analysis, writes report.json,
/// eigenvalues.csv and the per-analysis CSV files.
RunSummary run_analysis(const AnalysisConfig& config, const RunOptions& options);

/// Ready-made config document for a built-in family kind.
Json demo_config(FamilyKind kind);

}  // namespace opfam
