#include "app.hpp"

#include <cstdlib>

#include "mmsa/error.hpp"

namespace mmsa::app {

namespace {

constexpr std::size_t kBuiltinGrid = 99;

std::size_t get_size(const json& req, const char* key, std::size_t fallback) {
  if (!req.contains(key)) return fallback;
  const json& v = req.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

const json& require(const json& req, const char* key) {
  if (!req.is_object() || !req.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string("request needs '") + key + "'");
  }
  return req.at(key);
}

// Keys of "vary" given either as an array or as an object.
std::vector<Index> varied_keys(const ParameterVector& theta, const json& vary,
                               std::vector<std::string>& warnings) {
  std::vector<Index> out;
  auto add = [&](const std::string& key) {
    const Index p = resolve_parameter(theta, key, &warnings);
    if (std::find(out.begin(), out.end(), p) != out.end()) {
      throw Error(ErrorCode::ParseError, "parameter " + theta.label(p) + " is listed twice");
    }
    out.push_back(p);
  };
  if (vary.is_array()) {
    for (const auto& k : vary) {
      if (k.is_number_unsigned()) {
        add(std::to_string(k.get<std::size_t>()));
      } else if (k.is_string()) {
        add(k.get<std::string>());
      } else {
        throw Error(ErrorCode::ParseError, "'vary' entries must be parameter keys");
      }
    }
  } else if (vary.is_object()) {
    for (const auto& [k, _] : vary.items()) add(k);
  } else if (vary.is_string()) {
    add(vary.get<std::string>());
  } else {
    throw Error(ErrorCode::ParseError, "'vary' must be a key, an array of keys or an object");
  }
  if (out.empty()) throw Error(ErrorCode::EmptyVariation, "'vary' is empty");
  return out;
}

std::vector<Metric> metrics_of(const json& req) {
  std::vector<Metric> out;
  if (req.contains("metrics")) {
    for (const auto& m : req.at("metrics")) {
      if (!m.is_string()) throw Error(ErrorCode::ParseError, "metrics are strings");
      out.push_back(parse_metric(m.get<std::string>()));
    }
  } else if (req.contains("metric")) {
    if (!req.at("metric").is_string()) throw Error(ErrorCode::ParseError, "metric is a string");
    out.push_back(parse_metric(req.at("metric").get<std::string>()));
  } else {
    out = {parse_metric("kl"), parse_metric("cd")};
  }
  return out;
}

std::vector<Scheme> schemes_of(const json& req) {
  std::vector<Scheme> out;
  if (req.contains("schemes")) {
    const json& s = req.at("schemes");
    if (s.is_string()) {
      out.push_back(parse_scheme(s.get<std::string>()));
    } else {
      for (const auto& x : s) {
        if (!x.is_string()) throw Error(ErrorCode::ParseError, "schemes are strings");
        out.push_back(parse_scheme(x.get<std::string>()));
      }
    }
  } else if (req.contains("scheme") && req.at("scheme").is_string()) {
    out.push_back(parse_scheme(req.at("scheme").get<std::string>()));
  } else {
    out.push_back(Scheme::Proportional);
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "no scheme requested");
  return out;
}

json distribution_divergences(const Distribution& q, const Distribution& p,
                              const std::vector<Metric>& metrics) {
  json out = json::object();
  for (const auto& m : metrics) out[m.name()] = divergence(q, p, m);
  return out;
}

Distribution distribution_of(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string("'") + what + "' must be an array");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw Error(ErrorCode::ParseError, std::string("'") + what + "' holds numbers");
    v.push_back(x.get<double>());
  }
  return Distribution(std::move(v));
}

ParameterVector theta_of(const LoadedModel& m, const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string("'") + what + "' must be an array");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw Error(ErrorCode::ParseError, std::string("'") + what + "' holds numbers");
    v.push_back(x.get<double>());
  }
  if (v.size() != m.compiled.theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, std::string("'") + what + "' has " +
                                              std::to_string(v.size()) + " values, expected " +
                                              std::to_string(m.compiled.theta.size()));
  }
  return m.compiled.theta.with_values(std::move(v));
}

json with_warnings(json out, const std::vector<std::string>& warnings) {
  out["warnings"] = warnings;
  return out;
}

}  // namespace

std::size_t default_grid() {
  if (const char* env = std::getenv("MMSA_GRID_DEFAULT")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v >= 2) return v;
  }
  return kBuiltinGrid;
}

json handle_validate(const LoadedModel& m) {
  const CompiledModel& c = m.compiled;
  const bool ml = check_multilinear(c.model);
  json out{{"format", model_format_name(m.format)},
           {"n_atoms", c.model.n_atoms()},
           {"n_params", c.model.n_params()},
           {"n_blocks", c.model.partition().n_blocks()},
           {"multilinear", ml},
           {"regular_strict", ml && check_regular(c, Regularity::Strict)},
           {"regular_weak", ml && check_regular(c.model, Regularity::Weak)},
           {"violations", to_json(validate(c.model, c.theta))}};
  out["valid"] = validation_clean(out);
  return out;
}

bool validation_clean(const json& report) {
  return report.value("multilinear", false) && report.value("regular_weak", false) &&
         report.contains("violations") && report.at("violations").empty();
}

json handle_model(const LoadedModel& m) { return model_summary(m); }

json handle_prob(const LoadedModel& m, const json& req) {
  const CompiledModel& c = m.compiled;
  const AtomEvent event = parse_event_json(c, require(req, "event"));
  std::vector<std::string> warnings;
  ParameterVector theta = c.theta;
  if (req.contains("vary")) {
    ParsedVariation pv = parse_variation(req, c.theta);
    warnings = pv.warnings;
    theta = covary(c.model, c.theta, pv.spec(c.theta.partition())).theta_new;
  } else {
    c.theta.require_valid();
  }
  return with_warnings({{"probability", event_probability(c.model, theta, event)},
                        {"event_atoms", std::vector<Index>(event.atoms().begin(), event.atoms().end())},
                        {"covaried", req.contains("vary")}},
                       warnings);
}

json handle_covary(const LoadedModel& m, const json& req) {
  const CompiledModel& c = m.compiled;
  ParsedVariation pv = parse_variation(req, c.theta);
  const VariationSpec spec = pv.spec(c.theta.partition());
  const CovariationResult r = covary(c.model, c.theta, spec);
  json out = to_json(r, spec);
  out["original"] = c.theta.values();
  return with_warnings(std::move(out), pv.warnings);
}

namespace {

struct CurveRequest {
  std::vector<Index> varied;
  std::vector<Scheme> schemes;
  AtomEvent event;
  std::size_t grid;
  std::vector<std::string> warnings;
};

CurveRequest curve_request(const LoadedModel& m, const json& req) {
  const CompiledModel& c = m.compiled;
  std::vector<std::string> warnings;
  auto varied = varied_keys(c.theta, require(req, "vary"), warnings);
  return {std::move(varied), schemes_of(req), parse_event_json(c, require(req, "event")),
          get_size(req, "grid", default_grid()), std::move(warnings)};
}

std::vector<SensitivityCurve> curves_for(const LoadedModel& m, const CurveRequest& cr) {
  std::vector<SensitivityCurve> curves;
  for (Scheme s : cr.schemes) {
    curves.push_back(
        sensitivity_function(m.compiled.model, m.compiled.theta, cr.varied, s, cr.event, cr.grid));
  }
  return curves;
}

}  // namespace

json handle_sensitivity(const LoadedModel& m, const json& req) {
  const CompiledModel& c = m.compiled;
  const CurveRequest cr = curve_request(m, req);
  json curves = json::array();
  for (const auto& curve : curves_for(m, cr)) curves.push_back(to_json(curve, c));
  json domains = json::array();
  for (Index p : cr.varied) {
    const Index b = c.theta.partition().block_of(p);
    const auto block = c.theta.partition().block(b);
    const auto local = c.theta.block_values(b);
    const auto pos = static_cast<Index>(std::find(block.begin(), block.end(), p) - block.begin());
    json d{{"index", p}, {"label", c.theta.label(p)}, {"value", c.theta[p]}};
    try {
      d["order_preserving_max"] = order_preserving_upper_bound(local, pos);
    } catch (const Error&) {
      d["order_preserving_max"] = nullptr;
    }
    domains.push_back(std::move(d));
  }
  return with_warnings({{"curves", std::move(curves)},
                        {"grid", cr.grid},
                        {"baseline_probability", event_probability(c.model, c.theta, cr.event)},
                        {"domains", std::move(domains)}},
                       cr.warnings);
}

std::string sensitivity_csv(const LoadedModel& m, const json& req) {
  const CurveRequest cr = curve_request(m, req);
  return curves_to_csv(curves_for(m, cr), m.compiled.theta);
}

json handle_divergence(const LoadedModel& m, const json& req) {
  const CompiledModel& c = m.compiled;
  const std::vector<Metric> metrics = metrics_of(req);
  if (req.contains("p") || req.contains("q")) return handle_raw_divergence(req);
  c.theta.require_valid();
  if (req.contains("theta_q")) {
    const ParameterVector q = theta_of(m, req.at("theta_q"), "theta_q");
    const ParameterVector p = req.contains("theta_p") ? theta_of(m, req.at("theta_p"), "theta_p") : c.theta;
    q.require_valid();
    p.require_valid();
    return {{"divergences",
             distribution_divergences(distribution(c.model, q), distribution(c.model, p), metrics)}};
  }
  ParsedVariation pv = parse_variation(req, c.theta);
  const Distribution base = distribution(c.model, c.theta);
  std::vector<Scheme> schemes;
  if (req.contains("schemes")) {
    schemes = schemes_of(req);
  }
  if (schemes.empty()) {
    const auto r = covary(c.model, c.theta, pv.spec(c.theta.partition()));
    return with_warnings(
        {{"divergences", distribution_divergences(distribution(c.model, r.theta_new), base, metrics)}},
        pv.warnings);
  }
  json per = json::object();
  for (Scheme s : schemes) {
    const VariationSpec spec(c.theta.partition(), pv.targets, s);
    try {
      const auto r = covary(c.model, c.theta, spec);
      per[std::string(scheme_name(s))] =
          distribution_divergences(distribution(c.model, r.theta_new), base, metrics);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::SchemeDomain) throw;
      per[std::string(scheme_name(s))] = error_body(e);
    }
  }
  return with_warnings({{"schemes", std::move(per)}}, pv.warnings);
}

json handle_raw_divergence(const json& req) {
  const Distribution q = distribution_of(require(req, "q"), "q");
  const Distribution p = distribution_of(require(req, "p"), "p");
  return {{"divergences", distribution_divergences(q, p, metrics_of(req))}};
}

json handle_classify(const LoadedModel& m, const json& req) {
  const CompiledModel& c = m.compiled;
  std::vector<std::string> warnings;
  const auto varied = varied_keys(c.theta, require(req, "vary"), warnings);
  const AnalysisClass cls = classify_analysis(c.model, varied);
  const IndexGeometry g = index_geometry(c.model, varied);
  json out = to_json(cls, g, c.theta);
  json hs = json::array();
  for (const auto& h : h_support(c.model, g).sets) {
    json labels = json::array();
    for (Index p : h.params) labels.push_back(c.theta.label(p));
    hs.push_back({{"params", h.params}, {"labels", std::move(labels)}, {"atoms", h.atoms.size()}});
  }
  out["h_support"] = std::move(hs);
  return with_warnings(std::move(out), warnings);
}

json handle_project(const LoadedModel& m, const json& req) {
  const CompiledModel& c = m.compiled;
  ParsedVariation pv = parse_variation(req, c.theta);
  const std::size_t grid = get_size(req, "grid", 50);
  const auto threads = static_cast<unsigned>(get_size(req, "threads", 0));
  const ProjectionResult r = i_projection_oracle(c.model, c.theta, pv.targets, grid, threads);
  std::vector<Index> varied;
  for (const auto& [p, _] : pv.targets) varied.push_back(p);
  json out = to_json(r, index_geometry(c.model, varied));
  out["grid"] = grid;
  return with_warnings(std::move(out), pv.warnings);
}

json handle_analyze(const LoadedModel& m, const json& req) {
  const CompiledModel& c = m.compiled;
  ParsedVariation pv = parse_variation(req, c.theta);
  AnalysisOptions opt;
  opt.samples = get_size(req, "samples", opt.samples);
  opt.seed = get_size(req, "seed", opt.seed);
  opt.grid = get_size(req, "grid", opt.grid);
  if (req.contains("oracle")) {
    if (!req.at("oracle").is_boolean()) throw Error(ErrorCode::ParseError, "'oracle' is a boolean");
    opt.run_oracle = req.at("oracle").get<bool>();
  }
  const AnalysisReport report = analyze(c.model, c.theta, pv.targets, opt);
  json out = to_json(report);
  if (m.classifier) {
    try {
      const auto nb = verify_naive_bayes_optimality(*m.classifier, c.theta, pv.targets, opt.samples,
                                                    opt.seed, opt.grid);
      out["classifier_check"] = to_json(nb, report.geometry);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ClassParameterVaried) throw;
      out["classifier_check"] = error_body(e);
    }
  }
  return with_warnings(std::move(out), pv.warnings);
}

json error_body(const Error& e) { return {{"error", e.name()}, {"message", e.what()}}; }

int http_status(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Validation: return 400;
    case ErrorCategory::SchemeDomain: return 422;
    case ErrorCategory::DimensionGuard: return 413;
    case ErrorCategory::NotFound: return 404;
  }
  return 400;
}

ModelPtr Session::get() const {
  std::lock_guard<std::mutex> lock(mu_);
  return model_;
}

void Session::set(ModelPtr m) {
  std::lock_guard<std::mutex> lock(mu_);
  model_ = std::move(m);
}

}  // namespace mmsa::app
