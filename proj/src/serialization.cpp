#include "opfam/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace opfam {

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        write(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += close_pad;
      out += "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) {
        return e.is_structured();
      });
      out += "[";
      if (!flat) out += nl;
      bool first = true;
      for (const auto& e : j) {
        if (!first) {
          out += ",";
          if (!flat) out += nl;
          else if (indent > 0) out += " ";
        }
        first = false;
        if (!flat) out += pad;
        write(e, indent, depth + 1, out);
      }
      if (!flat) {
        out += nl;
        out += close_pad;
      }
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        out += format_double(v);
      } else {
        out += "\"" + format_double(v) + "\"";
      }
      return;
    }
    default:
      out += j.dump();
  }
}

Json indices(const std::vector<std::size_t>& v) {
  Json a = Json::array();
  for (auto i : v) a.push_back(i);
  return a;
}

Json reals(const std::vector<double>& v) {
  Json a = Json::array();
  for (double d : v) a.push_back(d);
  return a;
}

}  // namespace

std::string dump_canonical(const Json& j, int indent) {
  std::string out;
  write(j, indent, 0, out);
  out += "\n";
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const RealVector& v) {
  Json a = Json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

Json range_to_json(const FamilySample& sample, GridRange r) {
  return {{"lo", r.lo}, {"hi", r.hi}, {"x_lo", sample.x(r.lo)}, {"x_hi", sample.x(r.hi)}};
}

Json to_json(const AdaptedPairCertificate& c, const FamilySample& sample) {
  return {{"range", range_to_json(sample, c.range)},
          {"level", c.level},
          {"rank", c.rank},
          {"margin", c.margin},
          {"projection_modulus", c.projection_modulus},
          {"restriction_modulus", c.restriction_modulus}};
}

Json to_json(const Violation& v) {
  static const char* const kinds[] = {"edge_on_spectrum", "rank_jump", "projection_modulus",
                                      "restriction_modulus"};
  return {{"kind", kinds[static_cast<int>(v.kind)]},
          {"index", v.index},
          {"other_index", v.other_index},
          {"rank", v.rank},
          {"other_rank", v.other_rank},
          {"value", v.value},
          {"message", v.describe()}};
}

Json to_json(const CoveringCertificate& c, const FamilySample& sample) {
  Json ranges = Json::array();
  for (const auto& r : c.ranges) ranges.push_back(range_to_json(sample, r));
  return {{"level", c.level},
          {"shifts", reals(c.lambdas)},
          {"half_widths", reals(c.epsilons)},
          {"ranges", ranges},
          {"c_minus", c.c_minus},
          {"c_plus", c.c_plus},
          {"intersection", range_to_json(sample, c.intersection)},
          {"pair", to_json(c.pair, sample)}};
}

Json to_json(const DiscreteSpectrumReport& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    Json certs = Json::array();
    for (const auto& c : l.certificates) {
      certs.push_back({{"lo", c.range.lo}, {"hi", c.range.hi}, {"level", c.level},
                       {"rank", c.rank}, {"margin", c.margin},
                       {"projection_modulus", c.projection_modulus},
                       {"restriction_modulus", c.restriction_modulus}});
    }
    Json level = {{"b", l.b},
                  {"lemma_passed", l.lemma_passed},
                  {"certificates", certs},
                  {"lemma_failures", indices(l.lemma_failures)},
                  {"lemma_failure_reasons", l.lemma_failure_reasons},
                  {"definition_checked", l.definition_checked},
                  {"routes_agree", l.routes_agree}};
    if (l.definition_checked) {
      level["definition_passed"] = l.definition_passed;
      level["definition_failures"] = indices(l.definition_failures);
    }
    levels.push_back(std::move(level));
  }
  return {{"ceiling", r.ceiling},
          {"sweep", reals(r.sweep)},
          {"levels", levels},
          {"passed", r.passed},
          {"routes_agree", r.routes_agree}};
}

Json to_json(const ContinuityModulus& m) {
  Json edges = Json::array();
  for (const auto& e : m.edges) edges.push_back({e.x_left, e.x_right, e.value});
  return {{"metric", std::string(to_string(m.metric))}, {"max", m.max}, {"edges", edges}};
}

Json to_json(const Theorem1Certificate& c, const FamilySample& sample) {
  Json mats = Json::array();
  for (const auto& m : c.truncated_resolvents) mats.push_back(matrix_to_json(m));
  return {{"x_index", c.x_index},
          {"x", sample.x(c.x_index)},
          {"delta", c.delta},
          {"level_c", c.level_c},
          {"adapted_range", range_to_json(sample, c.adapted_range)},
          {"range", range_to_json(sample, c.range)},
          {"truncated_resolvents", mats},
          {"tail_bound", c.tail_bound},
          {"b_modulus", c.b_modulus},
          {"final_bound", c.final_bound}};
}

Json to_json(const StrictAdaptedness& s) {
  Json j = {{"epsilon", s.epsilon},
            {"range", {{"lo", s.range.lo}, {"hi", s.range.hi}}},
            {"modulus", s.modulus},
            {"cap", s.cap},
            {"passed", s.passed}};
  j["worst_edge"] = s.worst_edge ? Json(*s.worst_edge) : Json(nullptr);
  return j;
}

Json to_json(const Theorem2Certificate& c, const FamilySample& sample) {
  Json points = Json::array();
  for (const auto& p : c.points) {
    points.push_back({{"q", matrix_to_json(p.q)},
                      {"q_plus", matrix_to_json(p.q_plus)},
                      {"q_minus", matrix_to_json(p.q_minus)},
                      {"f_inner", matrix_to_json(p.f_inner)},
                      {"f_plus", matrix_to_json(p.f_plus)},
                      {"f_minus", matrix_to_json(p.f_minus)}});
  }
  return {{"profile", c.profile},
          {"x_index", c.x_index},
          {"x", sample.x(c.x_index)},
          {"delta", c.delta},
          {"epsilon", c.epsilon},
          {"level_c", c.level_c},
          {"level_threshold", c.level_threshold},
          {"strict_modulus", c.strict_modulus},
          {"adapted_range", range_to_json(sample, c.adapted_range)},
          {"range", range_to_json(sample, c.range)},
          {"points", points},
          {"decomposition_residual", c.decomposition_residual},
          {"partition_residual", c.partition_residual},
          {"positive_identity_residual", c.positive_identity_residual},
          {"negative_identity_residual", c.negative_identity_residual},
          {"ineq2_plus", c.ineq2_plus},
          {"ineq2_minus", c.ineq2_minus},
          {"ineq3_inner", c.ineq3_inner},
          {"ineq3_minus", c.ineq3_minus},
          {"ineq3_plus", c.ineq3_plus},
          {"final_bound", c.final_bound}};
}

Json to_json(const FlowResult& f, const FamilySample& sample) {
  Json j = {{"flow", f.flow}, {"method", std::string(to_string(f.method))}};
  Json crossings = Json::array();
  for (const auto& c : f.crossings) {
    crossings.push_back({{"branch", c.branch},
                         {"from_index", c.from_index},
                         {"to_index", c.to_index},
                         {"x_from", sample.x(c.from_index)},
                         {"x_to", sample.x(c.to_index)},
                         {"direction", c.direction}});
  }
  j["crossings"] = crossings;
  if (f.partition) {
    Json segs = Json::array();
    for (std::size_t k = 0; k < f.partition->levels.size(); ++k) {
      const std::size_t a = f.partition->breakpoints[k];
      const std::size_t b = f.partition->breakpoints[k + 1];
      segs.push_back({{"start", a},
                      {"end", b},
                      {"x_start", sample.x(a)},
                      {"x_end", sample.x(b)},
                      {"level", f.partition->levels[k]},
                      {"contribution", f.partition->contributions[k]}});
    }
    j["partition"] = segs;
  }
  return j;
}

Json to_json(const PolarizationResult& p) {
  return {{"norm", p.norm},
          {"interior", p.interior},
          {"near_minus", p.near_minus},
          {"near_plus", p.near_plus},
          {"passed", p.passed}};
}

Json to_json(const WeakDiscreteSpectrumReport& r) {
  Json fibers = Json::array();
  for (const auto& f : r.fibers) fibers.push_back(to_json(f));
  Json j = {{"fibers", fibers}, {"levels", to_json(r.levels)}, {"passed", r.passed}};
  j["first_unpolarized"] = r.first_unpolarized ? Json(*r.first_unpolarized) : Json(nullptr);
  return j;
}

Json to_json(const CorrespondenceReport& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"level", l.level},
                      {"transformed_level", l.transformed_level},
                      {"discrete_passed", l.discrete_passed},
                      {"weak_passed", l.weak_passed},
                      {"agree", l.agree}});
  }
  return {{"sign_check_passed", r.sign_check_passed},
          {"levels", levels},
          {"rank_checks", r.rank_checks},
          {"rank_mismatches", r.rank_mismatches},
          {"discrete", to_json(r.discrete)},
          {"weak", to_json(r.weak)},
          {"consistent", r.consistent}};
}

Json to_json(const TruncationReport& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"small_dim", s.small_dim},
                     {"large_dim", s.large_dim},
                     {"max_hausdorff", s.max_hausdorff},
                     {"max_projection_distance", s.max_projection_distance},
                     {"stable", s.stable}});
  }
  return {{"tolerance", r.tolerance}, {"steps", steps}, {"stable", r.stable}};
}

Json to_json(const SignCheckReport& r) {
  Json j = {{"threshold", r.threshold}, {"passed", r.passed}};
  j["first_failure"] = r.first_failure ? Json(*r.first_failure) : Json(nullptr);
  return j;
}

Json error_to_json(const std::exception& e) {
  Json j = {{"message", e.what()}};
  if (const auto* p = dynamic_cast<const NotHermitian*>(&e)) {
    j["type"] = "NotHermitian";
    j["deviation"] = p->deviation();
    j["row"] = p->row();
    j["col"] = p->col();
  } else if (const auto* p = dynamic_cast<const EdgeOnSpectrum*>(&e)) {
    j["type"] = "EdgeOnSpectrum";
    j["margin"] = p->margin();
    j["grid_index"] = p->grid_index();
  } else if (const auto* p = dynamic_cast<const NoGap*>(&e)) {
    j["type"] = "NoGap";
    j["grid_index"] = p->grid_index();
    j["lower_bound"] = p->lower_bound();
    j["ceiling"] = p->ceiling();
  } else if (const auto* p = dynamic_cast<const SingularParameter*>(&e)) {
    j["type"] = "SingularParameter";
    j["x"] = p->x();
  } else if (const auto* p = dynamic_cast<const BoundViolated*>(&e)) {
    j["type"] = "BoundViolated";
    j["inequality"] = p->inequality();
    j["value"] = p->value();
    j["bound"] = p->bound();
  } else if (const auto* p = dynamic_cast<const StrictAdaptednessFailed*>(&e)) {
    j["type"] = "StrictAdaptednessFailed";
    j["x_index"] = p->x_index();
    j["best_modulus"] = p->best_modulus();
    j["cap"] = p->cap();
  } else if (const auto* p = dynamic_cast<const EndpointOnSpectrum*>(&e)) {
    j["type"] = "EndpointOnSpectrum";
    j["grid_index"] = p->grid_index();
  } else if (const auto* p = dynamic_cast<const AmbiguousMatching*>(&e)) {
    j["type"] = "AmbiguousMatching";
    j["left_index"] = p->left_index();
    j["movement"] = p->movement();
    j["bound"] = p->bound();
  } else if (const auto* p = dynamic_cast<const PartitionFailed*>(&e)) {
    j["type"] = "PartitionFailed";
    j["left_index"] = p->left_index();
  } else if (dynamic_cast<const InvalidArgument*>(&e)) {
    j["type"] = "InvalidArgument";
  } else {
    j["type"] = "Error";
  }
  return j;
}

}  // namespace opfam
