#include "opfam/topology_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adapted_internal.hpp"

namespace opfam {

double graph_distance(const SpectralDecomposition& a, const SpectralDecomposition& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("graph distance needs equal dimensions");
  return operator_norm(resolvent_at_i(a) - resolvent_at_i(b));
}

double graph_distance(const HermitianOperator& a, const HermitianOperator& b) {
  return graph_distance(decompose(a), decompose(b));
}

double riesz_distance(const SpectralDecomposition& a, const SpectralDecomposition& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("Riesz distance needs equal dimensions");
  return hermitian_norm(bounded_transform(a) - bounded_transform(b));
}

double riesz_distance(const HermitianOperator& a, const HermitianOperator& b) {
  return riesz_distance(decompose(a), decompose(b));
}

std::string_view to_string(Metric metric) {
  return metric == Metric::Graph ? "graph" : "riesz";
}

ContinuityModulus continuity_modulus(const FamilySample& sample, Metric metric) {
  ContinuityModulus out;
  out.metric = metric;
  for (std::size_t i = 0; i + 1 < sample.size(); ++i) {
    const double v = metric == Metric::Graph
                         ? graph_distance(sample.spectrum(i), sample.spectrum(i + 1))
                         : riesz_distance(sample.spectrum(i), sample.spectrum(i + 1));
    out.edges.push_back({sample.x(i), sample.x(i + 1), v});
    out.max = std::max(out.max, v);
  }
  return out;
}

namespace {

// Drops endpoints until every value on the range is below `bound`. The longer
// side loses a point first; with equal sides the endpoint with the larger value
// goes (right side on an exact tie).
template <typename ValueAt>
GridRange contract(GridRange r, std::size_t x, double bound, ValueAt&& value_at) {
  auto worst = [&] {
    double w = 0.0;
    for (std::size_t y = r.lo; y <= r.hi; ++y) w = std::max(w, value_at(y));
    return w;
  };
  while (worst() >= bound && r.size() > 1) {
    const std::size_t left_len = x - r.lo;
    const std::size_t right_len = r.hi - x;
    bool drop_left;
    if (left_len != right_len) {
      drop_left = left_len > right_len;
    } else {
      drop_left = value_at(r.lo) > value_at(r.hi);
    }
    if (drop_left) {
      ++r.lo;
    } else {
      --r.hi;
    }
  }
  return r;
}

void require_below(const char* name, double value, double bound) {
  if (!(value < bound)) throw BoundViolated(name, value, bound);
}

}  // namespace

Theorem1Certificate theorem1_certify(const FamilySample& sample, std::size_t x_index,
                                     double delta, const Theorem1Options& options) {
  if (!(delta > 0.0)) throw InvalidArgument("theorem1 needs delta > 0");
  if (x_index >= sample.size()) throw InvalidArgument("grid index outside the sample");

  const AdaptedPairCertificate pair = find_adapted_pair(sample, x_index, 1.0 / delta, options.find);
  const double c = pair.level;
  const RealWindow window = RealWindow::symmetric(c);

  Theorem1Certificate cert;
  cert.x_index = x_index;
  cert.delta = delta;
  cert.level_c = c;
  cert.adapted_range = pair.range;

  const std::size_t n = pair.range.size();
  std::vector<Matrix> resolvents(n), truncated(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = sample.spectrum(pair.range.lo + k);
    resolvents[k] = resolvent_at_i(s);
    truncated[k] = s.apply([](double t) { return 1.0 / Complex(t, 1.0); },
                           [&](double t) { return window.contains(t); });
  }
  const std::size_t xk = x_index - pair.range.lo;
  std::vector<double> b_dist(n);
  for (std::size_t k = 0; k < n; ++k) b_dist[k] = operator_norm(truncated[k] - truncated[xk]);

  cert.range = contract(pair.range, x_index, delta,
                        [&](std::size_t y) { return b_dist[y - pair.range.lo]; });

  for (std::size_t y = cert.range.lo; y <= cert.range.hi; ++y) {
    const std::size_t k = y - pair.range.lo;
    cert.tail_bound = std::max(cert.tail_bound, operator_norm(resolvents[k] - truncated[k]));
    cert.b_modulus = std::max(cert.b_modulus, b_dist[k]);
    cert.final_bound =
        std::max(cert.final_bound, operator_norm(resolvents[k] - resolvents[xk]));
    if (sample.dim() <= options.embed_dim_limit) cert.truncated_resolvents.push_back(truncated[k]);
  }

  require_below("tail_bound", cert.tail_bound, delta);
  require_below("b_modulus", cert.b_modulus, delta);
  require_below("final_bound", cert.final_bound, 3.0 * delta);
  return cert;
}

StrictAdaptedness strict_adaptedness_certify(const FamilySample& sample, std::size_t x_index,
                                             double epsilon, double cap,
                                             const Tolerances& tol) {
  if (!(epsilon > 0.0)) throw InvalidArgument("strict adaptedness needs epsilon > 0");
  if (!(cap > 0.0)) throw InvalidArgument("strict adaptedness needs a positive cap");
  if (x_index >= sample.size()) throw InvalidArgument("grid index outside the sample");
  const double m = window_margin(sample.eigenvalues(x_index), RealWindow::symmetric(epsilon));
  if (m < tol.edge) throw EdgeOnSpectrum(m, tol.edge, static_cast<std::ptrdiff_t>(x_index));

  CertifyOptions opts;
  opts.tol = tol;
  StrictAdaptedness out;
  out.epsilon = epsilon;
  out.cap = cap;
  out.range = grow_adapted_range(sample, x_index, epsilon, sample.full_range(), opts);

  const RealWindow positive = RealWindow::at_least(epsilon);
  auto projection = [&](std::size_t y) {
    return sample.spectrum(y).apply([](double) { return Complex(1.0); },
                                    [&](double t) { return positive.contains(t); });
  };
  Matrix prev = projection(out.range.lo);
  for (std::size_t y = out.range.lo; y < out.range.hi; ++y) {
    Matrix next = projection(y + 1);
    const double d = hermitian_norm(next - prev);
    if (!out.worst_edge || d > out.modulus) {
      out.modulus = d;
      out.worst_edge = y;
    }
    prev = std::move(next);
  }
  out.passed = out.modulus < cap;
  return out;
}

double riesz_level_threshold(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidArgument("delta must lie in (0, 0.5)");
  return (1.0 - delta) / std::sqrt(2.0 * delta - delta * delta);
}

AdaptednessProfile riesz_profile() {
  return {"riesz", [](double t) { return bounded_transform(t); }, riesz_level_threshold,
          std::nullopt};
}

Theorem2Certificate theorem2_certify(const FamilySample& sample, std::size_t x_index,
                                     double delta, double cap, const Theorem2Options& options) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidArgument("delta must lie in (0, 0.5)");
  if (!(cap > 0.0)) throw InvalidArgument("theorem2 needs a positive cap");
  if (x_index >= sample.size()) throw InvalidArgument("grid index outside the sample");
  const auto& profile = options.profile;
  const Tolerances& tol = options.find.certify.tol;
  const double ceiling = profile.ceiling.value_or(
      options.find.ceiling.value_or(truncation_ceiling(sample)));

  // Strict adaptedness: first epsilon, ascending over positive gap midpoints.
  const RealVector& ev_x = sample.eigenvalues(x_index);
  std::vector<double> cuts{0.0};
  for (Index k = 0; k < ev_x.size(); ++k) {
    if (ev_x(k) > 0.0 && ev_x(k) < ceiling && ev_x(k) != cuts.back()) cuts.push_back(ev_x(k));
  }
  cuts.push_back(ceiling);
  std::optional<StrictAdaptedness> strict;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < cuts.size() && !strict; ++j) {
    const double eps = (cuts[j] + cuts[j + 1]) / 2.0;
    if (!(eps > 0.0) ||
        window_margin(ev_x, RealWindow::symmetric(eps)) < tol.edge) {
      continue;
    }
    StrictAdaptedness s = strict_adaptedness_certify(sample, x_index, eps, cap, tol);
    if (s.passed) {
      strict = s;
    } else {
      best = std::min(best, s.modulus);
    }
  }
  if (!strict) throw StrictAdaptednessFailed(x_index, best, cap);

  Theorem2Certificate cert;
  cert.profile = profile.name;
  cert.x_index = x_index;
  cert.delta = delta;
  cert.epsilon = strict->epsilon;
  cert.strict_modulus = strict->modulus;
  cert.level_threshold = profile.threshold(delta);

  FindOptions find = options.find;
  find.ceiling = ceiling;
  const AdaptedPairCertificate pair =
      find_adapted_pair(sample, x_index, std::max(cert.epsilon, cert.level_threshold), find);
  const double c = pair.level;
  cert.level_c = c;
  cert.adapted_range = {std::max(pair.range.lo, strict->range.lo),
                        std::min(pair.range.hi, strict->range.hi)};

  const Index dim = sample.dim();
  const Matrix identity = Matrix::Identity(dim, dim);
  const RealWindow inner = RealWindow::open(-c, c);
  const RealWindow upper = RealWindow::at_least(c);
  const RealWindow lower = RealWindow::at_most(-c);
  const RealWindow from_eps = RealWindow::at_least(cert.epsilon);
  const RealWindow eps_to_c(cert.epsilon, c, true, false);
  auto one = [](double) { return Complex(1.0); };
  auto f = [&](double t) { return Complex(profile.transform(t)); };

  const GridRange u1 = cert.adapted_range;
  const std::size_t n = u1.size();
  std::vector<Theorem2Point> pts(n);
  std::vector<Matrix> f_full(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = sample.spectrum(u1.lo + k);
    auto& p = pts[k];
    p.q = s.apply(one, [&](double t) { return inner.contains(t); });
    p.q_plus = s.apply(one, [&](double t) { return upper.contains(t); });
    p.q_minus = identity - p.q - p.q_plus;
    p.f_inner = s.apply(f, [&](double t) { return inner.contains(t); });
    p.f_plus = s.apply(f, [&](double t) { return upper.contains(t); });
    p.f_minus = s.apply(f, [&](double t) { return lower.contains(t); });
    f_full[k] = s.apply(f);
  }
  const std::size_t xk = x_index - u1.lo;

  std::vector<double> ineq3(n);
  for (std::size_t k = 0; k < n; ++k) {
    ineq3[k] = std::max({hermitian_norm(pts[k].f_inner - pts[xk].f_inner),
                         hermitian_norm(pts[k].q_minus - pts[xk].q_minus),
                         hermitian_norm(pts[k].q_plus - pts[xk].q_plus)});
  }
  cert.range = contract(u1, x_index, delta, [&](std::size_t y) { return ineq3[y - u1.lo]; });

  for (std::size_t y = cert.range.lo; y <= cert.range.hi; ++y) {
    const std::size_t k = y - u1.lo;
    const auto& s = sample.spectrum(y);
    const auto& p = pts[k];
    cert.decomposition_residual =
        std::max(cert.decomposition_residual,
                 hermitian_norm(f_full[k] - (p.f_minus + p.f_inner + p.f_plus)));
    cert.partition_residual =
        std::max(cert.partition_residual, hermitian_norm(p.q + p.q_plus + p.q_minus - identity));
    const Matrix p_eps = s.apply(one, [&](double t) { return from_eps.contains(t); });
    const Matrix p_eps_c = s.apply(one, [&](double t) { return eps_to_c.contains(t); });
    cert.positive_identity_residual = std::max(cert.positive_identity_residual,
                                               hermitian_norm(p.q_plus - (p_eps - p_eps_c)));
    const Matrix p_low = s.apply(one, [&](double t) { return lower.contains(t); });
    cert.negative_identity_residual =
        std::max(cert.negative_identity_residual, hermitian_norm(p.q_minus - p_low));
    cert.ineq2_plus = std::max(cert.ineq2_plus, hermitian_norm(p.f_plus - p.q_plus));
    cert.ineq2_minus = std::max(cert.ineq2_minus, hermitian_norm(p.f_minus + p.q_minus));
    cert.ineq3_inner = std::max(cert.ineq3_inner, hermitian_norm(p.f_inner - pts[xk].f_inner));
    cert.ineq3_minus = std::max(cert.ineq3_minus, hermitian_norm(p.q_minus - pts[xk].q_minus));
    cert.ineq3_plus = std::max(cert.ineq3_plus, hermitian_norm(p.q_plus - pts[xk].q_plus));
    cert.final_bound = std::max(cert.final_bound, hermitian_norm(f_full[k] - f_full[xk]));
    if (dim <= options.embed_dim_limit) cert.points.push_back(p);
  }

  require_below("decomposition_residual", cert.decomposition_residual,
                tol.reconstruction + std::numeric_limits<double>::min());
  require_below("positive_identity_residual", cert.positive_identity_residual,
                tol.projection + std::numeric_limits<double>::min());
  require_below("negative_identity_residual", cert.negative_identity_residual,
                tol.projection + std::numeric_limits<double>::min());
  require_below("ineq2_plus", cert.ineq2_plus, delta);
  require_below("ineq2_minus", cert.ineq2_minus, delta);
  require_below("ineq3_inner", cert.ineq3_inner, delta);
  require_below("ineq3_minus", cert.ineq3_minus, delta);
  require_below("ineq3_plus", cert.ineq3_plus, delta);
  require_below("final_bound", cert.final_bound, 7.0 * delta);
  return cert;
}

}  // namespace opfam
