#include "mmsa/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "mmsa/error.hpp"

namespace mmsa {

bool IndexGeometry::is_covaried(Index p) const {
  return std::binary_search(covaried.begin(), covaried.end(), p);
}

bool IndexGeometry::is_varied(Index p) const {
  return std::binary_search(varied.begin(), varied.end(), p);
}

IndexGeometry index_geometry(const SimplexPartition& partition, std::span<const Index> varied) {
  if (varied.empty()) throw Error(ErrorCode::EmptyVariation, "varied set is empty");
  IndexGeometry g;
  g.varied.assign(varied.begin(), varied.end());
  std::sort(g.varied.begin(), g.varied.end());
  if (std::adjacent_find(g.varied.begin(), g.varied.end()) != g.varied.end()) {
    throw Error(ErrorCode::ShapeMismatch, "varied set lists a parameter twice");
  }
  std::map<Index, std::vector<Index>> by_block;
  for (Index p : g.varied) {
    if (p >= partition.n_params()) {
      throw Error(ErrorCode::IndexOutOfRange, "varied index " + std::to_string(p) + " out of range");
    }
    by_block[partition.block_of(p)].push_back(p);
  }
  for (auto& [b, vs] : by_block) {
    g.touched_blocks.push_back(b);
    const auto block = partition.block(b);
    g.covaried.insert(g.covaried.end(), block.begin(), block.end());
    if (block.size() - vs.size() == 1) g.forced_blocks.push_back(b);
    g.varied_in_block.push_back(std::move(vs));
  }
  std::sort(g.covaried.begin(), g.covaried.end());
  for (Index p = 0; p < partition.n_params(); ++p) {
    if (!g.is_covaried(p)) g.fixed.push_back(p);
  }
  return g;
}

IndexGeometry index_geometry(const MonomialModel& model, std::span<const Index> varied) {
  return index_geometry(model.partition(), varied);
}

HSupport h_support(const MonomialModel& model, const IndexGeometry& geometry) {
  if (!model.is_multilinear()) {
    throw Error(ErrorCode::NonMultilinear, "H-support requires a multilinear model");
  }
  std::map<std::vector<Index>, std::vector<Index>> groups;
  HSupport out;
  for (Index y = 0; y < model.n_atoms(); ++y) {
    std::vector<Index> h;
    for (const auto& t : model.matrix().row(y)) {
      if (geometry.is_covaried(t.param)) h.push_back(t.param);
    }
    if (h.empty()) {
      out.untouched_atoms.push_back(y);
    } else {
      groups[std::move(h)].push_back(y);
    }
  }
  for (auto& [params, atoms] : groups) out.sets.push_back({params, std::move(atoms)});
  return out;
}

std::string_view analysis_kind_name(AnalysisKind kind) noexcept {
  switch (kind) {
    case AnalysisKind::Independent: return "independent";
    case AnalysisKind::FullyDependent: return "fully_dependent";
    case AnalysisKind::ConditionallyDependent: return "conditionally_dependent";
    case AnalysisKind::Other: return "other";
  }
  return "other";
}

namespace {

constexpr std::size_t kMaxOrderedBlocks = 6;

using HKey = std::vector<Index>;

// The H-sets a conditionally dependent analysis must produce for one
// ordering of the touched blocks.
std::set<HKey> conditional_pattern(const SimplexPartition& partition, const IndexGeometry& g,
                                   const std::vector<std::size_t>& order) {
  auto non_varied = [&](std::size_t t) {
    std::vector<Index> out;
    for (Index p : partition.block(g.touched_blocks[t])) {
      if (!g.is_varied(p)) out.push_back(p);
    }
    return out;
  };
  std::set<HKey> pattern;
  std::vector<HKey> prefixes{{}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& pre : prefixes) {
      for (Index j : non_varied(order[i])) {
        HKey h = pre;
        h.push_back(j);
        std::sort(h.begin(), h.end());
        pattern.insert(std::move(h));
      }
    }
    std::vector<HKey> next;
    for (const auto& pre : prefixes) {
      for (Index v : g.varied_in_block[order[i]]) {
        HKey h = pre;
        h.push_back(v);
        next.push_back(std::move(h));
      }
    }
    prefixes = std::move(next);
  }
  for (auto& h : prefixes) {
    std::sort(h.begin(), h.end());
    pattern.insert(std::move(h));
  }
  return pattern;
}

}  // namespace

AnalysisClass classify_analysis(const MonomialModel& model, std::span<const Index> varied) {
  if (!check_multilinear(model)) {
    throw Error(ErrorCode::NonMultilinear, "analysis classification requires a multilinear model");
  }
  if (!check_regular(model, Regularity::Weak)) {
    throw Error(ErrorCode::NotRegular,
                "analysis classification requires at most one parameter per block in each atom");
  }
  const IndexGeometry g = index_geometry(model, varied);
  const HSupport hs = h_support(model, g);
  const SimplexPartition& part = model.partition();
  const std::size_t r = g.touched_blocks.size();

  AnalysisClass out;
  if (std::all_of(hs.sets.begin(), hs.sets.end(),
                  [](const HSet& h) { return h.params.size() == 1; })) {
    out.kind = AnalysisKind::Independent;
    out.witness = r == 1 ? "single touched block"
                         : "no atom uses covaried parameters from two touched blocks";
    return out;
  }

  std::size_t combos = 1;
  for (Index b : g.touched_blocks) combos *= part.block(b).size();
  if (std::all_of(hs.sets.begin(), hs.sets.end(),
                  [&](const HSet& h) { return h.params.size() == r; }) &&
      hs.sets.size() == combos) {
    out.kind = AnalysisKind::FullyDependent;
    out.witness = "every combination of one parameter per touched block occurs in some atom";
    return out;
  }

  if (r > kMaxOrderedBlocks) {
    out.kind = AnalysisKind::Other;
    out.exhaustive = false;
    out.witness = "more than " + std::to_string(kMaxOrderedBlocks) +
                  " touched blocks; conditional dependence not searched (not disproven)";
    return out;
  }
  std::set<HKey> actual;
  for (const auto& h : hs.sets) actual.insert(h.params);
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), std::size_t{0});
  do {
    if (conditional_pattern(part, g, order) == actual) {
      out.kind = AnalysisKind::ConditionallyDependent;
      for (std::size_t t : order) out.block_order.push_back(g.touched_blocks[t]);
      out.witness = "covaried parameters nest along the block ordering";
      return out;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  out.kind = AnalysisKind::Other;
  out.witness = "atoms mix covaried parameters across touched blocks without a nested ordering";
  return out;
}

SensitivityCurve sensitivity_function(const MonomialModel& model, const ParameterVector& theta,
                                      std::span<const Index> varied, Scheme scheme,
                                      const AtomEvent& event, std::size_t resolution) {
  if (resolution < 2) {
    throw Error(ErrorCode::GridTooCoarse, "curve resolution must be at least 2");
  }
  if (varied.empty()) throw Error(ErrorCode::EmptyVariation, "no varied parameter");
  if (varied.size() > 2) {
    throw Error(ErrorCode::ShapeMismatch, "curves take one or two varied parameters");
  }
  if (model.n_params() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match the model");
  }
  theta.require_valid();
  const Distribution base = distribution(model, theta);
  for (Index a : event.atoms()) {
    if (a >= model.n_atoms()) throw Error(ErrorCode::IndexOutOfRange, "event atom out of range");
  }

  SensitivityCurve curve;
  curve.varied.assign(varied.begin(), varied.end());
  curve.scheme = scheme;
  curve.event_atoms.assign(event.atoms().begin(), event.atoms().end());
  curve.resolution = resolution;

  std::vector<double> axis(resolution);
  for (std::size_t k = 0; k < resolution; ++k) {
    axis[k] = static_cast<double>(k + 1) / static_cast<double>(resolution + 1);
  }
  const std::size_t n_points = varied.size() == 1 ? resolution : resolution * resolution;
  curve.points.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    CurvePoint pt;
    TargetMap targets;
    if (varied.size() == 1) {
      pt.x = {axis[i]};
    } else {
      pt.x = {axis[i / resolution], axis[i % resolution]};
    }
    for (std::size_t d = 0; d < varied.size(); ++d) targets[varied[d]] = pt.x[d];
    if (targets.size() != varied.size()) {
      throw Error(ErrorCode::ShapeMismatch, "varied set lists a parameter twice");
    }
    try {
      const VariationSpec spec(theta.partition(), targets, scheme);
      const auto res = covary(theta, spec);
      const Distribution q = distribution(model, res.theta_new);
      pt.present = true;
      pt.probability = event_probability(model, res.theta_new, event);
      pt.kl = kl_divergence(q, base);
      pt.cd = cd_distance(base, q);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::OrderPreservingMultiIndex:
        case ErrorCode::OrderPreservingMaximum:
        case ErrorCode::VariedWholeBlock:
        case ErrorCode::IndexOutOfRange:
          throw;
        default:
          pt.present = false;
          pt.error = std::string(e.name());
      }
    }
    curve.points.push_back(std::move(pt));
  }
  return curve;
}

ParameterVector proportional_covariation(const ParameterVector& theta, const TargetMap& targets) {
  return covary(theta, VariationSpec(theta.partition(), targets, Scheme::Proportional)).theta_new;
}

void require_in_l_sensi(const ParameterVector& theta, const TargetMap& targets,
                        const ParameterVector& q) {
  if (q.size() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "candidate parameter vector has the wrong length");
  }
  if (!q.is_valid()) {
    throw Error(ErrorCode::OutsideLSensi, "candidate is not a valid parameter vector: " +
                                              q.violations().front());
  }
  std::vector<Index> varied;
  for (const auto& [p, _] : targets) varied.push_back(p);
  const IndexGeometry g = index_geometry(theta.partition(), varied);
  constexpr double tol = 1e-12;
  for (Index p : g.fixed) {
    if (std::abs(q[p] - theta[p]) > tol) {
      throw Error(ErrorCode::OutsideLSensi,
                  "candidate moves untouched parameter " + theta.label(p));
    }
  }
  for (const auto& [p, t] : targets) {
    if (std::abs(q[p] - t) > tol) {
      throw Error(ErrorCode::OutsideLSensi,
                  "candidate does not meet the target of " + theta.label(p));
    }
  }
}

double pythagorean_residual(const MonomialModel& model, const ParameterVector& theta,
                            const TargetMap& targets, const ParameterVector& q) {
  if (model.n_params() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match the model");
  }
  theta.require_valid();
  require_in_l_sensi(theta, targets, q);
  const VariationSpec spec(theta.partition(), targets, Scheme::Proportional);
  const CovariationResult prop = covary(theta, spec);
  const ParameterVector& pt = prop.theta_new;

  std::map<Index, double> scale;
  for (std::size_t i = 0; i < prop.touched_blocks.size(); ++i) {
    scale[prop.touched_blocks[i]] = prop.scale_factors[i];
  }
  const IndexGeometry g = index_geometry(theta.partition(), spec.varied());
  const HSupport hs = h_support(model, g);
  const SimplexPartition& part = theta.partition();

  double residual = 0.0;
  for (const auto& h : hs.sets) {
    double t_v = 1.0, th_v = 1.0, b_r = 1.0, t_r = 1.0, alpha = 1.0;
    for (Index j : h.params) {
      if (g.is_varied(j)) {
        t_v *= targets.at(j);
        th_v *= theta[j];
      } else {
        b_r *= q[j];
        t_r *= pt[j];
        alpha *= scale.at(part.block_of(j));
      }
    }
    double w = 0.0;
    for (Index y : h.atoms) {
      double f = 1.0;
      for (const auto& term : model.matrix().row(y)) {
        if (!g.is_covaried(term.param)) f *= theta[term.param];
      }
      w += f;
    }
    residual += w * t_v * (b_r - t_r) * std::log(alpha * t_v / th_v);
  }
  return residual;
}

double pythagorean_gap(const MonomialModel& model, const ParameterVector& theta,
                       const TargetMap& targets, const ParameterVector& q) {
  require_in_l_sensi(theta, targets, q);
  const ParameterVector pt = proportional_covariation(theta, targets);
  const Distribution dp = distribution(model, theta);
  const Distribution dq = distribution(model, q);
  const Distribution dt = distribution(model, pt);
  return kl_divergence(dq, dp) - kl_divergence(dq, dt) - kl_divergence(dt, dp);
}

ParameterVector sample_l_sensi(const ParameterVector& theta, const TargetMap& targets,
                               std::mt19937_64& rng) {
  const VariationSpec spec(theta.partition(), targets);
  const SimplexPartition& part = theta.partition();
  std::vector<double> values = theta.values();
  std::exponential_distribution<double> gamma1(1.0);
  for (Index b : spec.touched_blocks()) {
    std::vector<Index> free;
    double mass = 1.0;
    for (Index p : part.block(b)) {
      auto it = targets.find(p);
      if (it == targets.end()) {
        free.push_back(p);
      } else {
        values[p] = it->second;
        mass -= it->second;
      }
    }
    if (free.size() == 1) {
      values[free[0]] = mass;
      continue;
    }
    std::vector<double> draw(free.size());
    while (true) {
      double s = 0.0;
      for (double& x : draw) s += (x = gamma1(rng));
      bool ok = true;
      for (double& x : draw) {
        x = x / s * mass;
        ok = ok && x >= 1e-12;
      }
      if (ok) break;
    }
    for (std::size_t i = 0; i < free.size(); ++i) values[free[i]] = draw[i];
  }
  return theta.with_values(std::move(values));
}

ResidualStats residual_statistics(const MonomialModel& model, const ParameterVector& theta,
                                  const TargetMap& targets, std::size_t samples,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ResidualStats st;
  st.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const ParameterVector q = sample_l_sensi(theta, targets, rng);
    const double r = pythagorean_residual(model, theta, targets, q);
    const double g = pythagorean_gap(model, theta, targets, q);
    if (i == 0) {
      st.min_residual = st.max_residual = r;
    } else {
      st.min_residual = std::min(st.min_residual, r);
      st.max_residual = std::max(st.max_residual, r);
    }
    st.max_abs_residual = std::max(st.max_abs_residual, std::abs(r));
    st.max_abs_gap = std::max(st.max_abs_gap, std::abs(g));
    st.max_abs_mismatch = std::max(st.max_abs_mismatch, std::abs(r - g));
  }
  return st;
}

NaiveBayesReport verify_naive_bayes_optimality(const ClassifierSpec& classifier,
                                               const ParameterVector& theta,
                                               const TargetMap& targets, std::size_t samples,
                                               std::uint64_t seed, std::size_t oracle_grid) {
  if (classifier.structure == ClassifierStructure::General) {
    throw Error(ErrorCode::ClassParameterVaried,
                "the optimality check covers naive Bayes and SPODE classifiers only");
  }
  const CompiledModel compiled = compile_classifier(classifier);
  if (compiled.theta.size() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match the classifier");
  }
  std::set<Index> protected_owners{0};
  if (classifier.structure == ClassifierStructure::Spode) {
    const auto& vars = compiled.atom_space->variables;
    for (Index i = 0; i < vars.size(); ++i) {
      if (vars[i].name == classifier.super_parent) protected_owners.insert(i);
    }
  }
  const SimplexPartition& part = compiled.model.partition();
  for (const auto& [p, _] : targets) {
    if (p >= part.n_params()) {
      throw Error(ErrorCode::IndexOutOfRange, "varied index " + std::to_string(p) + " out of range");
    }
    const Index owner = compiled.block_owner[part.block_of(p)];
    if (protected_owners.count(owner)) {
      throw Error(ErrorCode::ClassParameterVaried,
                  "parameter " + compiled.theta.label(p) +
                      " belongs to the class" +
                      (owner == 0 ? std::string() : std::string(" super-parent")) +
                      " distribution; only feature parameters may be varied");
    }
  }
  // Re-seat theta on the compiled partition so that labels line up.
  const ParameterVector th = compiled.theta.with_values(theta.values());
  NaiveBayesReport report;
  std::vector<Index> varied;
  for (const auto& [p, _] : targets) varied.push_back(p);
  report.classification = classify_analysis(compiled.model, varied);
  report.residuals = residual_statistics(compiled.model, th, targets, samples, seed);
  if (oracle_free_dimensions(part, targets) <= kOracleMaxFreeDimensions) {
    report.oracle = i_projection_oracle(compiled.model, th, targets, oracle_grid);
  }
  return report;
}

AnalysisReport analyze(const MonomialModel& model, const ParameterVector& theta,
                       const TargetMap& targets, const AnalysisOptions& options) {
  if (model.n_params() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match the model");
  }
  theta.require_valid();
  std::vector<Index> varied;
  for (const auto& [p, _] : targets) varied.push_back(p);
  const ParameterVector prop = proportional_covariation(theta, targets);
  const Distribution dp = distribution(model, theta);
  const Distribution dt = distribution(model, prop);
  AnalysisReport report{index_geometry(model, varied),
                        classify_analysis(model, varied),
                        prop,
                        kl_divergence(dt, dp),
                        cd_distance(dp, dt),
                        residual_statistics(model, theta, targets, options.samples, options.seed),
                        std::nullopt,
                        {}};
  if (options.run_oracle) {
    const std::size_t dims = oracle_free_dimensions(model.partition(), targets);
    if (dims > kOracleMaxFreeDimensions) {
      report.projection_skipped = "search has " + std::to_string(dims) +
                                  " free dimensions; the oracle handles at most " +
                                  std::to_string(kOracleMaxFreeDimensions);
    } else {
      report.projection = i_projection_oracle(model, theta, targets, options.grid);
    }
  }
  return report;
}

}  // namespace mmsa
