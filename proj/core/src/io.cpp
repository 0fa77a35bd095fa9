#include "mmsa/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmsa/bayes_net.hpp"
#include "mmsa/error.hpp"

namespace mmsa {

std::string_view model_format_name(ModelFormat f) noexcept {
  switch (f) {
    case ModelFormat::Raw: return "raw";
    case ModelFormat::BayesNet: return "bn";
    case ModelFormat::StagedTree: return "tree";
    case ModelFormat::Classifier: return "classifier";
  }
  return "raw";
}

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const json& field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  return doc.at(key);
}

template <typename T>
T get_as(const json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    parse_fail(what + ": " + e.what());
  }
}

std::vector<Variable> variables_from_json(const json& arr) {
  if (!arr.is_array()) parse_fail("'variables' must be an array");
  std::vector<Variable> vars;
  for (const auto& v : arr) {
    Variable var;
    var.name = get_as<std::string>(field(v, "name"), "variable name");
    const json& st = field(v, "states");
    if (st.is_number_unsigned()) {
      const auto n = st.get<std::size_t>();
      for (std::size_t s = 1; s <= n; ++s) var.states.push_back(std::to_string(s));
    } else {
      var.states = get_as<std::vector<std::string>>(st, "states of '" + var.name + "'");
    }
    vars.push_back(std::move(var));
  }
  return vars;
}

KeyedCpts cpts_from_json(const json& doc) {
  if (!doc.contains("cpts")) return {};
  return get_as<KeyedCpts>(doc.at("cpts"), "cpts");
}

std::map<std::string, std::vector<std::string>> parents_from_json(const json& doc) {
  if (!doc.contains("parents")) return {};
  return get_as<std::map<std::string, std::vector<std::string>>>(doc.at("parents"), "parents");
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_index(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

BayesNetSpec bayes_net_from_json(const json& doc) {
  return bayes_net_from_keyed(variables_from_json(field(doc, "variables")), parents_from_json(doc),
                              cpts_from_json(doc));
}

StagedTreeSpec staged_tree_from_json(const json& doc) {
  StagedTreeSpec spec;
  const json& vs = field(doc, "vertices");
  if (!vs.is_array()) parse_fail("'vertices' must be an array");
  for (const auto& v : vs) {
    TreeVertex tv;
    tv.id = get_as<std::string>(field(v, "id"), "vertex id");
    if (v.contains("children")) tv.children = get_as<std::vector<std::string>>(v.at("children"), "children");
    if (v.contains("labels")) tv.labels = get_as<std::vector<std::string>>(v.at("labels"), "labels");
    spec.vertices.push_back(std::move(tv));
  }
  if (doc.contains("stages")) {
    spec.stages = get_as<std::vector<std::vector<std::string>>>(doc.at("stages"), "stages");
  }
  if (doc.contains("probabilities")) {
    spec.probabilities = get_as<std::map<std::string, std::vector<double>>>(
        doc.at("probabilities"), "probabilities");
  }
  return spec;
}

ClassifierSpec classifier_from_json(const json& doc) {
  ClassifierSpec spec;
  std::vector<Variable> vars = variables_from_json(field(doc, "variables"));
  if (vars.empty()) parse_fail("classifier needs a class variable");
  std::string cls = doc.contains("class") ? get_as<std::string>(doc.at("class"), "class")
                                          : vars.front().name;
  bool found = false;
  for (auto& v : vars) {
    if (v.name == cls) {
      spec.class_variable = v;
      found = true;
    } else {
      spec.features.push_back(v);
    }
  }
  if (!found) throw Error(ErrorCode::UnknownVariable, "unknown class variable '" + cls + "'");

  const json& st = field(doc, "structure");
  std::string kind;
  if (st.is_string()) {
    kind = st.get<std::string>();
  } else {
    kind = get_as<std::string>(field(st, "type"), "structure type");
    if (st.contains("super_parent")) spec.super_parent = get_as<std::string>(st.at("super_parent"), "super_parent");
  }
  if (doc.contains("super_parent")) spec.super_parent = get_as<std::string>(doc.at("super_parent"), "super_parent");
  if (kind == "naive_bayes") {
    spec.structure = ClassifierStructure::NaiveBayes;
  } else if (kind == "spode") {
    spec.structure = ClassifierStructure::Spode;
    if (spec.super_parent.empty()) parse_fail("spode structure needs 'super_parent'");
  } else if (kind == "general") {
    spec.structure = ClassifierStructure::General;
    if (doc.contains("edges")) {
      for (const auto& e : get_as<std::vector<std::vector<std::string>>>(doc.at("edges"), "edges")) {
        if (e.size() != 2) parse_fail("edges are [from, to] pairs");
        spec.edges.emplace_back(e[0], e[1]);
      }
    }
    for (const auto& [child, pas] : parents_from_json(doc)) {
      for (const auto& p : pas) spec.edges.emplace_back(p, child);
    }
  } else {
    parse_fail("unknown classifier structure '" + kind + "'");
  }
  spec.cpts = cpts_from_json(doc);
  return spec;
}

CompiledModel raw_model_from_json(const json& doc) {
  const auto partition_blocks =
      get_as<std::vector<std::vector<Index>>>(field(doc, "partition"), "partition");
  auto partition = std::make_shared<const SimplexPartition>(partition_blocks);
  const std::size_t k = partition->n_params();

  std::vector<std::string> atoms;
  if (doc.contains("atoms")) atoms = get_as<std::vector<std::string>>(doc.at("atoms"), "atoms");
  std::vector<ExponentEntry> entries;
  std::size_t q = atoms.size();
  for (const auto& e : field(doc, "exponents")) {
    const auto v = get_as<std::vector<long long>>(e, "exponent entry");
    if (v.size() != 2 && v.size() != 3) parse_fail("exponent entries are [row, col] or [row, col, exp]");
    if (v[0] < 0 || v[1] < 0 || (v.size() == 3 && v[2] < 0)) {
      parse_fail("exponent entries must be non-negative");
    }
    if (v.size() == 3 && v[2] == 0) continue;
    entries.push_back({static_cast<Index>(v[0]), static_cast<Index>(v[1]),
                       v.size() == 3 ? static_cast<unsigned>(v[2]) : 1u});
    if (atoms.empty()) q = std::max(q, static_cast<std::size_t>(v[0]) + 1);
  }
  std::vector<std::string> params;
  if (doc.contains("params")) {
    params = get_as<std::vector<std::string>>(doc.at("params"), "params");
    if (params.size() != k) {
      throw Error(ErrorCode::ShapeMismatch, "'params' has " + std::to_string(params.size()) +
                                                " names for " + std::to_string(k) + " parameters");
    }
  }
  const auto theta = get_as<std::vector<double>>(field(doc, "theta"), "theta");
  if (theta.size() != k) {
    throw Error(ErrorCode::ShapeMismatch, "'theta' has " + std::to_string(theta.size()) +
                                              " values for " + std::to_string(k) + " parameters");
  }
  std::vector<Index> owner(partition->n_blocks());
  for (Index b = 0; b < owner.size(); ++b) owner[b] = b;
  return CompiledModel{MonomialModel(ExponentMatrix(q, k, std::move(entries)), partition, std::move(atoms)),
                       ParameterVector(partition, theta, std::move(params)),
                       ModelSource::RawMonomial,
                       std::nullopt,
                       std::move(owner),
                       {}};
}

LoadedModel load_model(const json& doc) {
  if (!doc.is_object()) parse_fail("model document must be a JSON object");
  ModelFormat f;
  if (doc.contains("format")) {
    const auto name = get_as<std::string>(doc.at("format"), "format");
    if (name == "raw") f = ModelFormat::Raw;
    else if (name == "bn") f = ModelFormat::BayesNet;
    else if (name == "tree") f = ModelFormat::StagedTree;
    else if (name == "classifier") f = ModelFormat::Classifier;
    else parse_fail("unknown model format '" + name + "'");
  } else if (doc.contains("exponents")) {
    f = ModelFormat::Raw;
  } else if (doc.contains("vertices")) {
    f = ModelFormat::StagedTree;
  } else if (doc.contains("structure")) {
    f = ModelFormat::Classifier;
  } else if (doc.contains("variables")) {
    f = ModelFormat::BayesNet;
  } else {
    parse_fail("cannot tell the model format (no exponents, vertices, structure or variables)");
  }
  switch (f) {
    case ModelFormat::Raw: return {raw_model_from_json(doc), f, std::nullopt};
    case ModelFormat::BayesNet: return {compile_bn(bayes_net_from_json(doc)), f, std::nullopt};
    case ModelFormat::StagedTree: return {compile_staged_tree(staged_tree_from_json(doc)), f, std::nullopt};
    case ModelFormat::Classifier: {
      ClassifierSpec spec = classifier_from_json(doc);
      CompiledModel m = compile_classifier(spec);
      return {std::move(m), f, std::move(spec)};
    }
  }
  parse_fail("unreachable");
}

LoadedModel load_model_file(const std::filesystem::path& path) {
  return load_model(read_json_file(path));
}

json raw_model_to_json(const CompiledModel& m) {
  json doc;
  doc["atoms"] = m.model.atom_labels();
  doc["params"] = m.theta.labels();
  doc["partition"] = m.model.partition().blocks();
  json ex = json::array();
  for (const auto& e : m.model.matrix().entries()) {
    if (e.exponent == 1) {
      ex.push_back({e.atom, e.param});
    } else {
      ex.push_back({e.atom, e.param, e.exponent});
    }
  }
  doc["exponents"] = std::move(ex);
  doc["theta"] = m.theta.values();
  return doc;
}

json model_summary(const LoadedModel& lm) {
  const CompiledModel& m = lm.compiled;
  json doc;
  doc["format"] = model_format_name(lm.format);
  doc["n_atoms"] = m.model.n_atoms();
  doc["n_params"] = m.model.n_params();
  doc["n_blocks"] = m.model.partition().n_blocks();
  doc["atoms"] = m.model.atom_labels();
  json params = json::array();
  for (Index i = 0; i < m.theta.size(); ++i) {
    params.push_back({{"index", i},
                      {"label", m.theta.label(i)},
                      {"value", m.theta[i]},
                      {"block", m.model.partition().block_of(i)}});
  }
  doc["params"] = std::move(params);
  doc["blocks"] = m.model.partition().blocks();
  const bool ml = check_multilinear(m.model);
  doc["multilinear"] = ml;
  doc["regular_strict"] = ml && check_regular(m, Regularity::Strict);
  doc["regular_weak"] = ml && check_regular(m.model, Regularity::Weak);
  doc["violations"] = to_json(validate(m.model, m.theta));
  if (m.atom_space) {
    json vars = json::array();
    for (const auto& v : m.atom_space->variables) vars.push_back({{"name", v.name}, {"states", v.states}});
    doc["variables"] = std::move(vars);
  }
  return doc;
}

Index resolve_parameter(const ParameterVector& theta, std::string_view key,
                        std::vector<std::string>* warnings) {
  const std::string k(trim(key));
  std::optional<Index> numeric;
  std::size_t n = 0;
  if (k.rfind("theta", 0) == 0 && parse_index(std::string_view(k).substr(5), n) && n >= 1 &&
      n <= theta.size()) {
    numeric = n - 1;
  } else if (parse_index(k, n) && n < theta.size()) {
    numeric = n;
  }
  const auto& labels = theta.labels();
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == k) {
      if (numeric && *numeric != i && warnings) {
        warnings->push_back("key '" + k + "' matches the label of parameter " +
                            std::to_string(i + 1) + " and also reads as parameter " +
                            std::to_string(*numeric + 1) + "; using the label");
      }
      return i;
    }
  }
  if (numeric) return *numeric;
  throw Error(ErrorCode::UnknownParameter, "unknown parameter '" + k + "'");
}

VariationSpec ParsedVariation::spec(const SimplexPartition& partition) const {
  return VariationSpec(partition, targets, scheme, block_schemes);
}

ParsedVariation parse_variation(const json& doc, const ParameterVector& theta) {
  ParsedVariation out;
  const json& vary = field(doc, "vary");
  if (!vary.is_object()) parse_fail("'vary' must be an object of key: value");
  for (const auto& [key, value] : vary.items()) {
    const Index p = resolve_parameter(theta, key, &out.warnings);
    if (!value.is_number()) parse_fail("target of '" + key + "' must be a number");
    if (!out.targets.emplace(p, value.get<double>()).second) {
      parse_fail("parameter " + theta.label(p) + " is varied twice");
    }
  }
  if (doc.contains("scheme")) {
    const json& sc = doc.at("scheme");
    if (sc.is_string()) {
      out.scheme = parse_scheme(sc.get<std::string>());
    } else if (sc.is_object()) {
      for (const auto& [key, value] : sc.items()) {
        if (!value.is_string()) parse_fail("scheme of '" + key + "' must be a string");
        const Scheme s = parse_scheme(value.get<std::string>());
        std::size_t b = 0;
        if (key == "default") {
          out.scheme = s;
          continue;
        }
        if (key.rfind("block", 0) == 0 && parse_index(std::string_view(key).substr(5), b)) {
          if (b < 1 || b > theta.partition().n_blocks()) {
            throw Error(ErrorCode::IndexOutOfRange, "unknown block '" + key + "'");
          }
          out.block_schemes[b - 1] = s;
        } else {
          out.block_schemes[theta.partition().block_of(resolve_parameter(theta, key, &out.warnings))] = s;
        }
      }
    } else {
      parse_fail("'scheme' must be a string or an object");
    }
  }
  return out;
}

std::pair<Index, std::optional<double>> parse_vary_argument(const ParameterVector& theta,
                                                            std::string_view text,
                                                            std::vector<std::string>* warnings) {
  const auto eq = text.rfind('=');
  if (eq != std::string_view::npos) {
    double v = 0.0;
    if (parse_number(trim(text.substr(eq + 1)), v)) {
      try {
        return {resolve_parameter(theta, text.substr(0, eq), warnings), v};
      } catch (const Error&) {
        // fall through: the whole text may be a label
      }
    }
  }
  return {resolve_parameter(theta, text, warnings), std::nullopt};
}

AtomEvent parse_event(const CompiledModel& m, std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) throw Error(ErrorCode::EmptyEvent, "event is empty");
  const auto parts = split(t, ',');
  if (m.atom_space) {
    Assignment a;
    for (const auto& part : parts) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) parse_fail("event terms are Var=state, got '" + part + "'");
      a.emplace_back(trim(std::string_view(part).substr(0, eq)),
                     trim(std::string_view(part).substr(eq + 1)));
    }
    return atoms_matching(*m.atom_space, a);
  }
  std::vector<Index> atoms;
  const auto& labels = m.model.atom_labels();
  for (const auto& raw : parts) {
    const std::string part = trim(raw);
    auto it = std::find(labels.begin(), labels.end(), part);
    std::size_t n = 0;
    if (it != labels.end()) {
      atoms.push_back(static_cast<Index>(it - labels.begin()));
    } else if (part.size() > 1 && part[0] == '#' && parse_index(std::string_view(part).substr(1), n) &&
               n >= 1 && n <= labels.size()) {
      atoms.push_back(n - 1);
    } else {
      throw Error(ErrorCode::UnknownState, "unknown atom '" + part + "'");
    }
  }
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  return AtomEvent(std::move(atoms), m.model.n_atoms());
}

AtomEvent parse_event_json(const CompiledModel& m, const json& event) {
  if (event.is_string()) return parse_event(m, std::string_view(event.get_ref<const std::string&>()));
  if (event.is_object()) {
    if (!m.atom_space) parse_fail("variable assignments need a model with variables");
    Assignment a;
    for (const auto& [var, state] : event.items()) {
      a.emplace_back(var, state.is_string() ? state.get<std::string>() : state.dump());
    }
    return atoms_matching(*m.atom_space, a);
  }
  if (event.is_array()) {
    std::vector<Index> atoms;
    const auto& labels = m.model.atom_labels();
    for (const auto& e : event) {
      if (e.is_number_integer()) {
        if (e.get<long long>() < 0) parse_fail("atom indices must be non-negative");
        atoms.push_back(e.get<Index>());
      } else if (e.is_string()) {
        auto it = std::find(labels.begin(), labels.end(), e.get<std::string>());
        if (it == labels.end()) throw Error(ErrorCode::UnknownState, "unknown atom '" + e.get<std::string>() + "'");
        atoms.push_back(static_cast<Index>(it - labels.begin()));
      } else {
        parse_fail("event arrays hold atom labels or indices");
      }
    }
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return AtomEvent(std::move(atoms), m.model.n_atoms());
  }
  parse_fail("event must be a string, object or array");
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& v : report) {
    out.push_back({{"kind", violation_kind_name(v.kind)}, {"message", v.message}});
  }
  return out;
}

json to_json(const CovariationResult& r, const VariationSpec& spec) {
  const ParameterVector& th = r.theta_new;
  json blocks = json::array();
  for (std::size_t i = 0; i < r.touched_blocks.size(); ++i) {
    const Index b = r.touched_blocks[i];
    const auto idx = th.partition().block(b);
    json params = json::array();
    for (Index p : idx) {
      params.push_back({{"index", p},
                        {"label", th.label(p)},
                        {"value", th[p]},
                        {"varied", spec.targets().count(p) > 0}});
    }
    blocks.push_back({{"block", b},
                      {"scheme", scheme_name(spec.scheme_for(b))},
                      {"scale_factor", r.scale_factors[i]},
                      {"params", std::move(params)}});
  }
  return {{"theta", th.values()},
          {"labels", th.labels()},
          {"touched_blocks", r.touched_blocks},
          {"scale_factors", r.scale_factors},
          {"blocks", std::move(blocks)}};
}

json to_json(const SensitivityCurve& curve, const CompiledModel& m) {
  json varied = json::array();
  for (Index p : curve.varied) varied.push_back({{"index", p}, {"label", m.theta.label(p)}});
  json points = json::array();
  for (const auto& pt : curve.points) {
    json j{{"x", pt.x}};
    if (pt.present) {
      j["probability"] = pt.probability;
      j["kl"] = pt.kl;
      j["cd"] = pt.cd;
    } else {
      j["probability"] = nullptr;
      j["kl"] = nullptr;
      j["cd"] = nullptr;
      j["error"] = pt.error;
    }
    points.push_back(std::move(j));
  }
  return {{"varied", std::move(varied)},
          {"scheme", scheme_name(curve.scheme)},
          {"event_atoms", curve.event_atoms},
          {"resolution", curve.resolution},
          {"points", std::move(points)}};
}

namespace {

json geometry_json(const IndexGeometry& g) {
  return {{"varied", g.varied},
          {"covaried", g.covaried},
          {"fixed", g.fixed},
          {"touched_blocks", g.touched_blocks},
          {"forced_blocks", g.forced_blocks}};
}

}  // namespace

json to_json(const AnalysisClass& c, const IndexGeometry& g, const ParameterVector& theta) {
  json varied = json::array();
  for (Index p : g.varied) varied.push_back(theta.label(p));
  return {{"kind", analysis_kind_name(c.kind)},
          {"witness", c.witness},
          {"exhaustive", c.exhaustive},
          {"block_order", c.block_order},
          {"varied_labels", std::move(varied)},
          {"geometry", geometry_json(g)}};
}

json to_json(const ResidualStats& s) {
  return {{"samples", s.samples},
          {"max_abs_residual", s.max_abs_residual},
          {"max_abs_gap", s.max_abs_gap},
          {"max_abs_mismatch", s.max_abs_mismatch},
          {"min_residual", s.min_residual},
          {"max_residual", s.max_residual}};
}

json to_json(const ProjectionResult& r, const IndexGeometry& g) {
  json cov = json::object();
  for (Index p : g.covaried) cov[r.argmin_theta.label(p)] = r.argmin_theta[p];
  return {{"argmin_theta", r.argmin_theta.values()},
          {"argmin_covaried", std::move(cov)},
          {"min_kl", r.min_kl},
          {"proportional_kl", r.proportional_kl},
          {"grid_step", r.grid_step},
          {"block_steps", r.block_steps},
          {"matches_proportional", r.matches_proportional},
          {"free_dimensions", r.free_dimensions},
          {"candidates", r.candidates}};
}

json to_json(const AnalysisReport& r) {
  json out = to_json(r.classification, r.geometry, r.proportional);
  out["proportional"] = {{"theta", r.proportional.values()},
                         {"kl", r.proportional_kl},
                         {"cd", r.proportional_cd}};
  out["residuals"] = to_json(r.residuals);
  out["projection"] = r.projection ? to_json(*r.projection, r.geometry) : json(nullptr);
  if (!r.projection_skipped.empty()) out["projection_skipped"] = r.projection_skipped;
  return out;
}

json to_json(const NaiveBayesReport& r, const IndexGeometry& g) {
  return {{"kind", analysis_kind_name(r.classification.kind)},
          {"residuals", to_json(r.residuals)},
          {"oracle", r.oracle ? to_json(*r.oracle, g) : json(nullptr)}};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string curves_to_csv(const std::vector<SensitivityCurve>& curves, const ParameterVector& theta) {
  std::string out;
  if (curves.empty()) return out;
  for (Index p : curves.front().varied) out += csv_field(theta.label(p)) + ",";
  out += "scheme,event_probability,kl,cd\n";
  for (const auto& c : curves) {
    for (const auto& pt : c.points) {
      for (double x : pt.x) out += format_double(x) + ",";
      out += std::string(scheme_name(c.scheme)) + ",";
      if (pt.present) {
        out += format_double(pt.probability) + "," + format_double(pt.kl) + "," + format_double(pt.cd);
      } else {
        out += ",,";
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace mmsa
