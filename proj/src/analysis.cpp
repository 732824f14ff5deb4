#include "opfam/analysis.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace opfam {

ConfigError::ConfigError(std::string path, const std::string& what)
    : Error(path + " " + what), path_(std::move(path)) {}

std::string_view to_string(AnalysisKind kind) {
  switch (kind) {
    case AnalysisKind::CertifyAdapted: return "certify-adapted";
    case AnalysisKind::DiscreteSpectrum: return "discrete-spectrum";
    case AnalysisKind::Theorem1: return "theorem1";
    case AnalysisKind::Theorem2: return "theorem2";
    case AnalysisKind::Flow: return "flow";
    case AnalysisKind::Polarized: return "polarized";
    case AnalysisKind::Distances: return "distances";
    case AnalysisKind::Truncation: return "truncation";
  }
  return "unknown";
}

namespace {

std::optional<AnalysisKind> parse_analysis_kind(std::string_view s) {
  for (auto k : {AnalysisKind::CertifyAdapted, AnalysisKind::DiscreteSpectrum,
                 AnalysisKind::Theorem1, AnalysisKind::Theorem2, AnalysisKind::Flow,
                 AnalysisKind::Polarized, AnalysisKind::Distances, AnalysisKind::Truncation}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Typed access to one JSON object, reporting failures with the field path and
// rejecting keys nobody asked for.
class Fields {
 public:
  Fields(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "must be an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* get(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) { return get(key) != nullptr; }

  const Json& required(const std::string& key) {
    const Json* v = get(key);
    if (!v) throw ConfigError(at(key), "is required");
    return *v;
  }

  std::optional<double> number(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ConfigError(at(key), "must be a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
    return d;
  }

  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  double required_number(const std::string& key) {
    required(key);
    return *number(key);
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) throw ConfigError(at(key), "must be an integer");
    return v->get<std::int64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key), "must be a boolean");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(at(key), "must be a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(at(key), "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const Json& e = (*v)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "must be a finite number");
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::optional<std::vector<std::int64_t>> integers(const std::string& key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(at(key), "must be an array of integers");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_integer()) {
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "must be an integer");
      }
      out.push_back((*v)[i].get<std::int64_t>());
    }
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "is not a recognized field");
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_open(double v, double lo, double hi, const std::string& path) {
  if (!(v > lo && v < hi)) throw ConfigError(path, "out of (" + num(lo) + ", " + num(hi) + ")");
}

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
}

AffinePath parse_affine(Fields& parent, const std::string& key, AffinePath fallback) {
  const Json* v = parent.get(key);
  if (!v) return fallback;
  Fields f(*v, parent.at(key));
  AffinePath p{f.number("offset", fallback.offset), f.number("slope", fallback.slope)};
  f.finish();
  return p;
}

FamilySpec parse_family(const Json& j, std::uint64_t seed, const std::filesystem::path& base_dir) {
  Fields f(j, "family");
  FamilySpec spec;
  const std::string kind = [&] {
    f.required("kind");
    return *f.string("kind");
  }();
  const auto parsed = parse_family_kind(kind);
  if (!parsed) throw ConfigError("family.kind", "unknown family kind '" + kind + "'");
  spec.kind = *parsed;

  if (auto m = f.integer("modes")) {
    if (*m < 1 || *m > 5000) throw ConfigError("family.modes", "out of [1, 5000]");
    spec.modes = static_cast<int>(*m);
  }
  if (auto d = f.integer("dim")) {
    if (*d < 1 || *d > 10000) throw ConfigError("family.dim", "out of [1, 10000]");
    spec.dim = static_cast<int>(*d);
  }
  spec.flux = parse_affine(f, "flux", spec.flux);
  spec.coupling = parse_affine(f, "coupling", spec.coupling);
  if (auto p = f.numbers("padding")) spec.padding = *p;
  spec.seed = seed;
  if (auto s = f.integer("seed")) {
    if (*s < 0) throw ConfigError("family.seed", "must be >= 0");
    spec.seed = static_cast<std::uint64_t>(*s);
  }
  if (auto p = f.string("path")) {
    std::filesystem::path path(*p);
    spec.path = path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  }
  if (auto t = f.integer("truncate_to")) {
    if (*t < 1) throw ConfigError("family.truncate_to", "must be >= 1");
    spec.truncate_to = static_cast<int>(*t);
  }
  f.finish();
  if (spec.kind == FamilyKind::MatrixPathFile && spec.path.empty()) {
    throw ConfigError("family.path", "is required for matrix_path_file");
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("family", e.what());
  }
  return spec;
}

GridSpec parse_grid(const Json& j) {
  Fields f(j, "grid");
  GridSpec g;
  if (auto values = f.numbers("values")) {
    if (f.has("start") || f.has("end") || f.has("points") || f.has("exclude")) {
      throw ConfigError("grid", "takes either values or start/end/points, not both");
    }
    g.values = *values;
  } else {
    g.start = f.required_number("start");
    g.end = f.required_number("end");
    f.required("points");
    const auto points = *f.integer("points");
    if (points < 2 || points > 1000000) throw ConfigError("grid.points", "out of [2, 1000000]");
    g.points = static_cast<std::size_t>(points);
    if (!(*g.start < *g.end)) throw ConfigError("grid.end", "must exceed grid.start");
    if (const Json* ex = f.get("exclude")) {
      Fields e(*ex, "grid.exclude");
      g.exclude_center = e.required_number("center");
      g.exclude_half_width = e.required_number("half_width");
      e.finish();
      require_positive(*g.exclude_half_width, "grid.exclude.half_width");
      if (g.points < 4) throw ConfigError("grid.points", "must be >= 4 with an excluded window");
      if (!(*g.exclude_center - *g.exclude_half_width > *g.start &&
            *g.exclude_center + *g.exclude_half_width < *g.end)) {
        throw ConfigError("grid.exclude", "window must lie inside (start, end)");
      }
    }
  }
  f.finish();
  try {
    g.build();
  } catch (const InvalidArgument& e) {
    throw ConfigError(g.values.empty() ? "grid" : "grid.values", e.what());
  }
  return g;
}

void parse_x_indices(Fields& f, Json& out) {
  if (auto xs = f.integers("x_indices")) {
    if (xs->empty()) throw ConfigError(f.at("x_indices"), "must not be empty");
    for (std::size_t i = 0; i < xs->size(); ++i) {
      if ((*xs)[i] < 0) {
        throw ConfigError(f.at("x_indices") + "[" + std::to_string(i) + "]", "must be >= 0");
      }
    }
    out["x_indices"] = *xs;
  }
}

std::vector<double> positive_levels(Fields& f, const std::string& key, bool below_one) {
  f.required(key);
  const auto levels = *f.numbers(key);
  if (levels.empty()) throw ConfigError(f.at(key), "must not be empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::string p = f.at(key) + "[" + std::to_string(i) + "]";
    if (below_one) {
      require_open(levels[i], 0.0, 1.0, p);
    } else {
      require_positive(levels[i], p);
    }
  }
  return levels;
}

Json parse_params(AnalysisKind kind, const Json* raw, const std::string& path) {
  static const Json empty = Json::object();
  Fields f(raw ? *raw : empty, path);
  Json p = Json::object();
  switch (kind) {
    case AnalysisKind::CertifyAdapted: {
      p["b"] = f.number("b", 1.0);
      require_positive(p["b"], f.at("b"));
      p["span"] = f.number("span", 1.0);
      require_positive(p["span"], f.at("span"));
      for (const char* cap : {"projection_cap", "restriction_cap"}) {
        if (auto v = f.number(cap)) {
          require_positive(*v, f.at(cap));
          p[cap] = *v;
        }
      }
      p["covering"] = f.boolean("covering", false);
      parse_x_indices(f, p);
      break;
    }
    case AnalysisKind::DiscreteSpectrum: {
      p["b_levels"] = positive_levels(f, "b_levels", false);
      const auto sweep = f.integer("sweep_points").value_or(41);
      if (sweep < 2 || sweep > 100000) throw ConfigError(f.at("sweep_points"), "out of [2, 100000]");
      p["sweep_points"] = sweep;
      p["definition_route"] = f.boolean("definition_route", true);
      p["span"] = f.number("span", 1.0);
      require_positive(p["span"], f.at("span"));
      break;
    }
    case AnalysisKind::Theorem1: {
      p["delta"] = f.required_number("delta");
      require_open(p["delta"], 0.0, 1.0, f.at("delta"));
      p["embed_matrices"] = f.boolean("embed_matrices", false);
      parse_x_indices(f, p);
      break;
    }
    case AnalysisKind::Theorem2: {
      p["delta"] = f.required_number("delta");
      require_open(p["delta"], 0.0, 0.5, f.at("delta"));
      p["cap"] = f.number("cap", 0.5);
      require_positive(p["cap"], f.at("cap"));
      p["embed_matrices"] = f.boolean("embed_matrices", false);
      parse_x_indices(f, p);
      break;
    }
    case AnalysisKind::Flow: {
      const std::string method = f.string("method").value_or("both");
      if (method != "tracking" && method != "partition" && method != "both") {
        throw ConfigError(f.at("method"), "must be one of tracking, partition, both");
      }
      p["method"] = method;
      p["projection_cap"] = f.number("projection_cap", 0.5);
      require_positive(p["projection_cap"], f.at("projection_cap"));
      if (auto e = f.integer("expected")) p["expected"] = *e;
      break;
    }
    case AnalysisKind::Polarized: {
      p["b_levels"] = positive_levels(f, "b_levels", true);
      p["eta"] = f.number("eta", 0.1);
      require_open(p["eta"], 0.0, 1.0, f.at("eta"));
      if (auto m = f.integer("interior_budget")) {
        if (*m < 0) throw ConfigError(f.at("interior_budget"), "must be >= 0");
        p["interior_budget"] = *m;
      }
      p["transform"] = f.boolean("transform", true);
      if (f.has("correspondence_levels")) {
        if (!p["transform"].get<bool>()) {
          throw ConfigError(f.at("correspondence_levels"), "requires transform = true");
        }
        p["correspondence_levels"] = positive_levels(f, "correspondence_levels", false);
      }
      if (auto d = f.number("delta")) {
        require_open(*d, 0.0, 0.5, f.at("delta"));
        p["delta"] = *d;
        p["cap"] = f.number("cap", 0.5);
        require_positive(p["cap"], f.at("cap"));
      }
      parse_x_indices(f, p);
      break;
    }
    case AnalysisKind::Distances: {
      std::vector<std::string> metrics{"graph", "riesz"};
      if (const Json* m = f.get("metrics")) {
        if (!m->is_array() || m->empty()) throw ConfigError(f.at("metrics"), "must be a non-empty array");
        metrics.clear();
        for (std::size_t i = 0; i < m->size(); ++i) {
          const Json& e = (*m)[i];
          if (!e.is_string() || (e != "graph" && e != "riesz")) {
            throw ConfigError(f.at("metrics") + "[" + std::to_string(i) + "]",
                              "must be graph or riesz");
          }
          metrics.push_back(e.get<std::string>());
        }
      }
      p["metrics"] = metrics;
      if (auto mm = f.number("max_modulus")) {
        require_positive(*mm, f.at("max_modulus"));
        p["max_modulus"] = *mm;
      }
      break;
    }
    case AnalysisKind::Truncation: {
      f.required("dims");
      const auto dims = *f.integers("dims");
      if (dims.size() < 2) throw ConfigError(f.at("dims"), "needs at least two dimensions");
      for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] < 1 || (i > 0 && dims[i] <= dims[i - 1])) {
          throw ConfigError(f.at("dims") + "[" + std::to_string(i) + "]",
                            "must be positive and strictly increasing");
        }
      }
      p["dims"] = dims;
      const bool has_level = f.has("level");
      const bool has_window = f.has("window");
      if (has_level == has_window) throw ConfigError(path, "needs exactly one of level, window");
      if (has_level) {
        p["level"] = f.required_number("level");
        require_positive(p["level"], f.at("level"));
      } else {
        Fields w(f.required("window"), f.at("window"));
        const double lo = w.required_number("lo");
        const double hi = w.required_number("hi");
        w.finish();
        if (!(lo < hi)) throw ConfigError(f.at("window"), "needs lo < hi");
        p["window"] = {{"lo", lo}, {"hi", hi}};
      }
      if (auto t = f.number("tolerance")) {
        require_positive(*t, f.at("tolerance"));
        p["tolerance"] = *t;
      }
      break;
    }
  }
  f.finish();
  return p;
}

}  // namespace

ParameterGrid GridSpec::build() const {
  if (!values.empty()) return ParameterGrid(values);
  if (exclude_center) {
    return ParameterGrid::excluding(*start, *end, points, *exclude_center, *exclude_half_width);
  }
  return ParameterGrid::linspace(*start, *end, points);
}

AnalysisConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  Fields f(doc, "");
  AnalysisConfig cfg;
  cfg.source = doc;
  if (auto s = f.integer("seed")) {
    if (*s < 0) throw ConfigError("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*s);
  }
  cfg.family = parse_family(f.required("family"), cfg.seed, base_dir);
  if (const Json* g = f.get("grid")) cfg.grid = parse_grid(*g);
  if (!cfg.grid && cfg.family.analytic()) throw ConfigError("grid", "is required for analytic families");
  if (auto o = f.string("output_dir")) cfg.output_dir = *o;
  f.string("description");

  const Json& analyses = f.required("analyses");
  if (!analyses.is_array() || analyses.empty()) {
    throw ConfigError("analyses", "must be a non-empty array");
  }
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    const std::string path = "analyses[" + std::to_string(i) + "]";
    Fields a(analyses[i], path);
    a.required("kind");
    const std::string kind = *a.string("kind");
    const auto parsed = parse_analysis_kind(kind);
    if (!parsed) throw ConfigError(path + ".kind", "unknown analysis kind '" + kind + "'");
    AnalysisRequest req;
    req.kind = *parsed;
    req.params = parse_params(req.kind, a.get("params"), path + ".params");
    a.finish();
    cfg.analyses.push_back(std::move(req));
  }
  f.finish();
  return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("is not valid JSON: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

std::size_t configured_grid_size(const AnalysisConfig& config) {
  if (config.grid) return config.grid->size();
  try {
    return load_matrix_path(config.family.path).size();
  } catch (const InvalidArgument& e) {
    throw ConfigError("family.path", e.what());
  }
}

void validate_against_grid(const AnalysisConfig& config, std::size_t grid_size) {
  for (std::size_t i = 0; i < config.analyses.size(); ++i) {
    const Json& p = config.analyses[i].params;
    if (!p.contains("x_indices")) continue;
    const auto& xs = p["x_indices"];
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (xs[k].get<std::size_t>() >= grid_size) {
        throw ConfigError("analyses[" + std::to_string(i) + "].params.x_indices[" +
                              std::to_string(k) + "]",
                          "out of [0, " + std::to_string(grid_size - 1) + "]");
      }
    }
  }
}

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& dir, std::string name, const std::string& header,
          std::vector<std::string>& registry)
      : out_(dir / name) {
    if (!out_) throw Error("cannot write " + (dir / name).string());
    out_ << header << '\n';
    registry.push_back(std::move(name));
  }

  CsvFile& cell(double v) { return raw(format_double(v)); }
  CsvFile& cell(long long v) { return raw(std::to_string(v)); }
  CsvFile& cell(std::size_t v) { return raw(std::to_string(v)); }
  CsvFile& cell(int v) { return raw(std::to_string(v)); }
  CsvFile& cell(const std::string& s) { return raw(s); }
  CsvFile& empty() { return raw(""); }
  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvFile& raw(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }

  std::ofstream out_;
  bool first_ = true;
};

std::vector<std::size_t> base_points(const Json& params, const FamilySample& sample) {
  std::vector<std::size_t> out;
  if (params.contains("x_indices")) {
    for (const auto& x : params["x_indices"]) out.push_back(x.get<std::size_t>());
  } else {
    out.push_back(sample.size() / 2);
  }
  return out;
}

std::vector<double> doubles(const Json& a) { return a.get<std::vector<double>>(); }

struct Outcome {
  bool passed = false;
  Json result = Json::object();
};

class Runner {
 public:
  Runner(const AnalysisConfig& cfg, const FamilySample& sample, std::filesystem::path dir,
         std::vector<std::string>& files)
      : cfg_(cfg), sample_(sample), dir_(std::move(dir)), files_(files) {}

  Outcome run(std::size_t index, const AnalysisRequest& req) {
    prefix_ = "analysis" + std::to_string(index) + "_" + std::string(to_string(req.kind));
    const Json& p = req.params;
    switch (req.kind) {
      case AnalysisKind::CertifyAdapted: return certify_adapted(p);
      case AnalysisKind::DiscreteSpectrum: return discrete_spectrum(p);
      case AnalysisKind::Theorem1: return theorem1(p);
      case AnalysisKind::Theorem2: return theorem2(p);
      case AnalysisKind::Flow: return flow(p);
      case AnalysisKind::Polarized: return polarized(p);
      case AnalysisKind::Distances: return distances(p);
      case AnalysisKind::Truncation: return truncation(p);
    }
    return {};
  }

 private:
  CsvFile csv(const std::string& suffix, const std::string& header) {
    return CsvFile(dir_, prefix_ + suffix + ".csv", header, files_);
  }

  Outcome certify_adapted(const Json& p) {
    FindOptions find;
    find.gap_search_span = p["span"];
    if (p.contains("projection_cap")) find.certify.projection_cap = p["projection_cap"].get<double>();
    if (p.contains("restriction_cap")) find.certify.restriction_cap = p["restriction_cap"].get<double>();
    Outcome o;
    o.passed = true;
    Json certs = Json::array();
    auto out = csv("", "x,level,rank,x_lo,x_hi,projection_modulus,restriction_modulus");
    for (std::size_t x : base_points(p, sample_)) {
      Json entry = {{"x_index", x}, {"x", sample_.x(x)}};
      try {
        const auto cert = find_adapted_pair(sample_, x, p["b"], find);
        entry["certificate"] = to_json(cert, sample_);
        out.cell(sample_.x(x)).cell(cert.level).cell(cert.rank).cell(sample_.x(cert.range.lo))
            .cell(sample_.x(cert.range.hi)).cell(cert.projection_modulus)
            .cell(cert.restriction_modulus).end();
        if (p["covering"].get<bool>()) {
          entry["covering"] = to_json(covering_construction(sample_, x, cert.level), sample_);
        }
      } catch (const Error& e) {
        entry["error"] = error_to_json(e);
        o.passed = false;
      }
      certs.push_back(std::move(entry));
    }
    o.result["points"] = certs;
    return o;
  }

  Outcome discrete_spectrum(const Json& p) {
    DiscreteSpectrumOptions opts;
    opts.sweep_points = p["sweep_points"];
    opts.run_definition_route = p["definition_route"];
    opts.find.gap_search_span = p["span"];
    const auto report = discrete_spectrum_certify(sample_, doubles(p["b_levels"]), opts);
    auto out = csv("_levels", "b,x,passed,level,rank,x_lo,x_hi");
    for (const auto& level : report.levels) {
      std::size_t k = 0;
      for (std::size_t x = 0; x < sample_.size(); ++x) {
        const bool failed =
            std::find(level.lemma_failures.begin(), level.lemma_failures.end(), x) !=
            level.lemma_failures.end();
        out.cell(level.b).cell(sample_.x(x)).cell(failed ? 0 : 1);
        if (failed) {
          out.empty().empty().empty().empty();
        } else {
          const auto& c = level.certificates[k++];
          out.cell(c.level).cell(c.rank).cell(sample_.x(c.range.lo)).cell(sample_.x(c.range.hi));
        }
        out.end();
      }
    }
    return {report.passed && report.routes_agree, to_json(report)};
  }

  Outcome theorem1(const Json& p) {
    Theorem1Options opts;
    if (!p["embed_matrices"].get<bool>()) opts.embed_dim_limit = 0;
    const double delta = p["delta"];
    Outcome o;
    o.passed = true;
    Json certs = Json::array();
    auto out = csv("_bounds", "x,delta,level,x_lo,x_hi,tail_bound,b_modulus,final_bound");
    for (std::size_t x : base_points(p, sample_)) {
      try {
        const auto c = theorem1_certify(sample_, x, delta, opts);
        certs.push_back({{"x_index", x}, {"certificate", to_json(c, sample_)}});
        out.cell(sample_.x(x)).cell(delta).cell(c.level_c).cell(sample_.x(c.range.lo))
            .cell(sample_.x(c.range.hi)).cell(c.tail_bound).cell(c.b_modulus)
            .cell(c.final_bound).end();
      } catch (const Error& e) {
        certs.push_back({{"x_index", x}, {"error", error_to_json(e)}});
        o.passed = false;
      }
    }
    o.result["points"] = certs;
    return o;
  }

  Outcome theorem2_like(const Json& p, const FamilySample& sample, const Theorem2Options& opts,
                        const std::string& suffix) {
    const double delta = p["delta"];
    const double cap = p["cap"];
    Outcome o;
    o.passed = true;
    Json certs = Json::array();
    auto out = csv(suffix,
                   "x,delta,epsilon,level,x_lo,x_hi,ineq2_plus,ineq2_minus,ineq3_inner,"
                   "ineq3_minus,ineq3_plus,final_bound");
    for (std::size_t x : base_points(p, sample)) {
      try {
        const auto c = theorem2_certify(sample, x, delta, cap, opts);
        certs.push_back({{"x_index", x}, {"certificate", to_json(c, sample)}});
        out.cell(sample.x(x)).cell(delta).cell(c.epsilon).cell(c.level_c)
            .cell(sample.x(c.range.lo)).cell(sample.x(c.range.hi)).cell(c.ineq2_plus)
            .cell(c.ineq2_minus).cell(c.ineq3_inner).cell(c.ineq3_minus).cell(c.ineq3_plus)
            .cell(c.final_bound).end();
      } catch (const Error& e) {
        certs.push_back({{"x_index", x}, {"error", error_to_json(e)}});
        o.passed = false;
      }
    }
    o.result["points"] = certs;
    return o;
  }

  Outcome theorem2(const Json& p) {
    Theorem2Options opts;
    if (!p["embed_matrices"].get<bool>()) opts.embed_dim_limit = 0;
    return theorem2_like(p, sample_, opts, "_bounds");
  }

  Outcome flow(const Json& p) {
    const std::string method = p["method"];
    Outcome o;
    o.passed = true;
    std::optional<int> tracked, partitioned;
    auto crossings = csv("_crossings", "method,branch,x_from,x_to,direction");
    if (method != "partition") {
      try {
        const auto r = flow_by_tracking(sample_);
        tracked = r.flow;
        o.result["tracking"] = to_json(r, sample_);
        for (const auto& c : r.crossings) {
          crossings.cell(std::string("tracking")).cell(c.branch).cell(sample_.x(c.from_index))
              .cell(sample_.x(c.to_index)).cell(c.direction).end();
        }
      } catch (const Error& e) {
        o.result["tracking"] = {{"error", error_to_json(e)}};
        o.passed = false;
      }
    }
    if (method != "tracking") {
      PartitionOptions opts;
      opts.projection_cap = p["projection_cap"];
      auto segments = csv("_partition", "x_start,x_end,level,contribution");
      try {
        const auto r = flow_by_partition(sample_, opts);
        partitioned = r.flow;
        o.result["partition"] = to_json(r, sample_);
        const auto& part = *r.partition;
        for (std::size_t k = 0; k < part.levels.size(); ++k) {
          segments.cell(sample_.x(part.breakpoints[k])).cell(sample_.x(part.breakpoints[k + 1]))
              .cell(part.levels[k]).cell(part.contributions[k]).end();
        }
      } catch (const Error& e) {
        o.result["partition"] = {{"error", error_to_json(e)}};
        o.passed = false;
      }
    }
    const std::optional<int> flow = tracked ? tracked : partitioned;
    if (tracked && partitioned) {
      o.result["methods_agree"] = *tracked == *partitioned;
      o.passed = o.passed && *tracked == *partitioned;
    }
    o.result["flow"] = flow ? Json(*flow) : Json(nullptr);
    if (p.contains("expected")) {
      o.result["expected"] = p["expected"];
      o.passed = o.passed && flow && *flow == p["expected"].get<int>();
    }
    return o;
  }

  Outcome polarized(const Json& p) {
    PolarizationCheck check = PolarizationCheck::defaults_for(sample_.dim());
    check.eta = p["eta"];
    if (p.contains("interior_budget")) check.interior_budget = p["interior_budget"];
    const bool transform = p["transform"];
    const FamilySample image = transform ? sample_.bounded_transformed() : sample_;

    Outcome o;
    o.result["transform"] = transform;
    o.result["eta"] = check.eta;
    o.result["interior_budget"] = check.interior_budget;
    const auto weak = weak_discrete_spectrum_certify(image, doubles(p["b_levels"]), check);
    o.result["weak_discrete_spectrum"] = to_json(weak);
    o.passed = weak.passed && weak.levels.routes_agree;

    auto fibers = csv("_fibers", "x,norm,interior,near_minus,near_plus,passed");
    for (std::size_t i = 0; i < image.size(); ++i) {
      const auto& f = weak.fibers[i];
      fibers.cell(image.x(i)).cell(f.norm).cell(f.interior).cell(f.near_minus).cell(f.near_plus)
          .cell(f.passed ? 1 : 0).end();
    }

    if (p.contains("correspondence_levels")) {
      const auto corr =
          transform_correspondence_check(sample_, doubles(p["correspondence_levels"]), check);
      o.result["correspondence"] = to_json(corr);
      o.passed = o.passed && corr.consistent;
    }
    if (p.contains("delta")) {
      Json certs = Json::array();
      for (std::size_t x : base_points(p, image)) {
        try {
          const auto c = theorem3_certify(image, x, p["delta"], p["cap"], check);
          certs.push_back({{"x_index", x}, {"certificate", to_json(c, image)}});
        } catch (const Error& e) {
          certs.push_back({{"x_index", x}, {"error", error_to_json(e)}});
          o.passed = false;
        }
      }
      o.result["norm_continuity"] = certs;
    }
    return o;
  }

  Outcome distances(const Json& p) {
    Outcome o;
    o.passed = true;
    for (const auto& name : p["metrics"]) {
      const Metric metric = name == "graph" ? Metric::Graph : Metric::Riesz;
      const auto m = continuity_modulus(sample_, metric);
      o.result[name.get<std::string>()] = to_json(m);
      auto out = csv("_" + name.get<std::string>(), "x_left,x_right,value");
      for (const auto& e : m.edges) out.cell(e.x_left).cell(e.x_right).cell(e.value).end();
      if (p.contains("max_modulus")) o.passed = o.passed && m.max <= p["max_modulus"].get<double>();
    }
    return o;
  }

  Outcome truncation(const Json& p) {
    const ParameterGrid grid = cfg_.grid ? cfg_.grid->build() : sample_.grid();
    const RealWindow window =
        p.contains("level") ? RealWindow::symmetric(p["level"].get<double>())
                            : RealWindow::closed(p["window"]["lo"].get<double>(),
                                                 p["window"]["hi"].get<double>());
    std::vector<int> dims;
    for (const auto& d : p["dims"]) dims.push_back(d.get<int>());
    std::optional<double> tolerance;
    if (p.contains("tolerance")) tolerance = p["tolerance"].get<double>();
    const auto report = truncation_check(cfg_.family, grid, dims, window, tolerance);
    auto out = csv("_steps", "small_dim,large_dim,max_hausdorff,max_projection_distance,stable");
    for (const auto& s : report.steps) {
      out.cell(s.small_dim).cell(s.large_dim).cell(s.max_hausdorff)
          .cell(s.max_projection_distance).cell(s.stable ? 1 : 0).end();
    }
    return {report.stable, to_json(report)};
  }

  const AnalysisConfig& cfg_;
  const FamilySample& sample_;
  std::filesystem::path dir_;
  std::vector<std::string>& files_;
  std::string prefix_;
};

Json versions() {
  return {{"opfam", OPFAM_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

RunSummary run_analysis(const AnalysisConfig& config, const RunOptions& options) {
  validate_against_grid(config, configured_grid_size(config));
  std::filesystem::create_directories(options.output_dir);

  RunSummary summary;
  Json report = {{"tool", "opfam"},
                 {"versions", versions()},
                 {"seed", config.seed},
                 {"config", config.source}};

  std::optional<ParameterGrid> grid;
  if (config.grid) grid = config.grid->build();
  std::optional<FamilySample> sampled;
  try {
    sampled.emplace(sample(config.family, grid, options.threads));
  } catch (const InvalidArgument& e) {
    throw ConfigError("family", e.what());
  } catch (const Error& e) {
    // Singular parameter or a non-Hermitian file entry: nothing else can run.
    report["sample_error"] = error_to_json(e);
    report["analyses"] = Json::array();
    report["passed"] = false;
    report["files"] = Json::array();
    write_text(options.output_dir / "report.json", dump_canonical(report));
    summary.report = std::move(report);
    return summary;
  }
  const FamilySample& s = *sampled;

  report["family"] = {{"kind", std::string(to_string(config.family.kind))},
                      {"dim", s.dim()},
                      {"grid_points", s.size()},
                      {"x_min", s.x(0)},
                      {"x_max", s.x(s.size() - 1)}};

  {
    std::string header = "x";
    for (Index k = 1; k <= s.dim(); ++k) header += ",lambda_" + std::to_string(k);
    CsvFile ev(options.output_dir, "eigenvalues.csv", header, summary.files);
    for (std::size_t i = 0; i < s.size(); ++i) {
      ev.cell(s.x(i));
      for (Index k = 0; k < s.dim(); ++k) ev.cell(s.eigenvalues(i)(k));
      ev.end();
    }
  }

  Runner runner(config, s, options.output_dir, summary.files);
  Json analyses = Json::array();
  bool all_passed = true;
  for (std::size_t i = 0; i < config.analyses.size(); ++i) {
    const auto& req = config.analyses[i];
    Json entry = {{"index", i}, {"kind", std::string(to_string(req.kind))}, {"params", req.params}};
    try {
      Outcome o = runner.run(i, req);
      entry["passed"] = o.passed;
      entry["result"] = std::move(o.result);
      all_passed = all_passed && o.passed;
    } catch (const Error& e) {
      entry["passed"] = false;
      entry["error"] = error_to_json(e);
      all_passed = false;
    }
    analyses.push_back(std::move(entry));
  }
  report["analyses"] = std::move(analyses);
  report["passed"] = all_passed;
  report["files"] = summary.files;
  write_text(options.output_dir / "report.json", dump_canonical(report));
  summary.passed = all_passed;
  summary.report = std::move(report);
  return summary;
}

Json demo_config(FamilyKind kind) {
  Json cfg = {{"seed", 0}};
  switch (kind) {
    case FamilyKind::DiracCircle:
      cfg["description"] = "Dirac operator on the circle with flux x; one eigenvalue crosses zero";
      cfg["family"] = {{"kind", "dirac_circle"}, {"modes", 20}, {"flux", {{"offset", 0.0}, {"slope", 1.0}}}};
      cfg["grid"] = {{"start", -0.49}, {"end", 0.49}, {"points", 201}};
      cfg["analyses"] = Json::array({
          {{"kind", "flow"}, {"params", {{"method", "both"}, {"expected", 1}}}},
          {{"kind", "discrete-spectrum"}, {"params", {{"b_levels", {1.4, 5.0}}}}},
          {{"kind", "theorem1"}, {"params", {{"delta", 0.1}, {"x_indices", {50, 100, 150}}}}},
          {{"kind", "theorem2"}, {"params", {{"delta", 0.1}, {"x_indices", {50, 100, 150}}}}},
          {{"kind", "distances"}, {"params", Json::object()}},
          {{"kind", "polarized"},
           {"params", {{"b_levels", {bounded_transform(1.4)}}, {"correspondence_levels", {1.4}}}}},
          {{"kind", "truncation"}, {"params", {{"dims", {21, 31, 41}}, {"level", 4.5}}}},
      });
      break;
    case FamilyKind::HarmonicPerturbed:
      cfg["description"] = "Harmonic ladder with a nearest-neighbour coupling g(x) = x";
      cfg["family"] = {{"kind", "harmonic_perturbed"}, {"dim", 12}, {"coupling", {{"offset", 0.0}, {"slope", 1.0}}}};
      cfg["grid"] = {{"start", 0.0}, {"end", 1.0}, {"points", 101}};
      cfg["analyses"] = Json::array({
          {{"kind", "flow"}, {"params", {{"method", "both"}}}},
          {{"kind", "discrete-spectrum"}, {"params", {{"b_levels", {1.0, 2.0}}}}},
          {{"kind", "distances"}, {"params", Json::object()}},
      });
      break;
    case FamilyKind::TangentBlowup:
      cfg["description"] = "tan(pi x) next to fixed eigenvalues; the grid skips the pole at 1/2";
      cfg["family"] = {{"kind", "tangent_blowup"}, {"padding", {-3.0, -2.0, 2.0, 3.0}}};
      cfg["grid"] = {{"start", 0.1}, {"end", 0.9}, {"points", 200},
                     {"exclude", {{"center", 0.5}, {"half_width", 0.02}}}};
      cfg["analyses"] = Json::array({
          {{"kind", "distances"}, {"params", Json::object()}},
          {{"kind", "certify-adapted"}, {"params", {{"b", 1.0}, {"x_indices", {0, 50, 150, 199}}}}},
      });
      break;
    case FamilyKind::LinearCrossing:
      cfg["description"] = "One eigenvalue x - 1/2 crossing zero among fixed ones";
      cfg["family"] = {{"kind", "linear_crossing"}, {"dim", 5}};
      cfg["grid"] = {{"start", 0.0}, {"end", 1.0}, {"points", 101}};
      cfg["analyses"] = Json::array({
          {{"kind", "flow"}, {"params", {{"method", "both"}, {"expected", 1}}}},
          {{"kind", "discrete-spectrum"}, {"params", {{"b_levels", {0.25, 1.0}}}}},
          {{"kind", "distances"}, {"params", Json::object()}},
      });
      break;
    case FamilyKind::RandomCrossings:
      cfg["description"] = "cos/sin interpolation between two seeded random Hermitian matrices";
      cfg["seed"] = 7;
      cfg["family"] = {{"kind", "random_crossings"}, {"dim", 8}};
      cfg["grid"] = {{"start", 0.0}, {"end", 1.0}, {"points", 101}};
      cfg["analyses"] = Json::array({
          {{"kind", "flow"}, {"params", {{"method", "both"}}}},
          {{"kind", "distances"}, {"params", Json::object()}},
      });
      break;
    case FamilyKind::MatrixPathFile:
      cfg["description"] = "Family read from a matrix path file next to this config";
      cfg["family"] = {{"kind", "matrix_path_file"}, {"path", "matrix_path.json"}};
      cfg["analyses"] = Json::array({
          {{"kind", "flow"}, {"params", {{"method", "both"}}}},
          {{"kind", "distances"}, {"params", Json::object()}},
      });
      break;
  }
  return cfg;
}

}  // namespace opfam
