#include "mmsa/bayes_net.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mmsa/error.hpp"

namespace mmsa {

std::size_t parent_configurations(const BayesNetSpec& spec, Index var) {
  std::size_t n = 1;
  for (Index p : spec.parents.at(var)) n *= spec.variables.at(p).states.size();
  return n;
}

namespace {

Index find_variable(const std::vector<Variable>& vars, const std::string& name) {
  for (Index i = 0; i < vars.size(); ++i) {
    if (vars[i].name == name) return i;
  }
  throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'");
}

Index find_state(const Variable& var, const std::string& state) {
  for (Index s = 0; s < var.states.size(); ++s) {
    if (var.states[s] == state) return s;
  }
  throw Error(ErrorCode::UnknownState,
              "variable '" + var.name + "' has no state '" + state + "'");
}

// Parent configuration index -> state index per parent (last parent fastest).
std::vector<Index> decode_configuration(const BayesNetSpec& spec, Index var, std::size_t c) {
  const auto& pa = spec.parents[var];
  std::vector<Index> states(pa.size());
  for (std::size_t k = pa.size(); k-- > 0;) {
    const std::size_t radix = spec.variables[pa[k]].states.size();
    states[k] = c % radix;
    c /= radix;
  }
  return states;
}

std::string parameter_label(const BayesNetSpec& spec, Index var, std::size_t config, Index state) {
  const auto& v = spec.variables[var];
  std::string label = "P(" + v.name + "=" + v.states[state];
  const auto& pa = spec.parents[var];
  if (!pa.empty()) {
    label += "|";
    const auto states = decode_configuration(spec, var, config);
    for (std::size_t k = 0; k < pa.size(); ++k) {
      if (k) label += ",";
      label += spec.variables[pa[k]].name + "=" + spec.variables[pa[k]].states[states[k]];
    }
  }
  return label + ")";
}

void check_spec(const BayesNetSpec& spec) {
  if (spec.variables.empty()) {
    throw Error(ErrorCode::CptShapeMismatch, "Bayesian network has no variables");
  }
  if (spec.parents.size() != spec.variables.size() || spec.cpts.size() != spec.variables.size()) {
    throw Error(ErrorCode::CptShapeMismatch, "parents/cpts do not match the variable list");
  }
  for (Index i = 0; i < spec.variables.size(); ++i) {
    const auto& v = spec.variables[i];
    if (v.states.size() < 2) {
      throw Error(ErrorCode::CptShapeMismatch,
                  "variable '" + v.name + "' needs at least two states");
    }
    for (Index p : spec.parents[i]) {
      if (p >= i) {
        throw Error(ErrorCode::CyclicGraph, "parent of '" + v.name +
                                                "' does not precede it in the variable order");
      }
    }
    const std::size_t nconf = parent_configurations(spec, i);
    if (spec.cpts[i].size() != nconf) {
      throw Error(ErrorCode::CptShapeMismatch,
                  "variable '" + v.name + "' has " + std::to_string(spec.cpts[i].size()) +
                      " CPT columns, expected " + std::to_string(nconf));
    }
    for (std::size_t c = 0; c < nconf; ++c) {
      const auto& col = spec.cpts[i][c];
      if (col.size() != v.states.size()) {
        throw Error(ErrorCode::CptShapeMismatch,
                    "CPT column " + std::to_string(c) + " of '" + v.name + "' has " +
                        std::to_string(col.size()) + " entries, expected " +
                        std::to_string(v.states.size()));
      }
      double s = 0.0;
      for (double x : col) {
        if (!(x > kPositivityMargin && x < 1.0 - kPositivityMargin)) {
          throw Error(ErrorCode::NonSimplexCpt,
                      "CPT of '" + v.name + "' has a non-positive or unit entry");
        }
        s += x;
      }
      if (std::abs(s - 1.0) > kSimplexTolerance) {
        throw Error(ErrorCode::NonSimplexCpt,
                    "CPT column " + std::to_string(c) + " of '" + v.name + "' sums to " +
                        std::to_string(s));
      }
    }
  }
}

}  // namespace

BayesNetSpec bayes_net_from_keyed(std::vector<Variable> variables,
                                  const std::map<std::string, std::vector<std::string>>& parents,
                                  const KeyedCpts& cpts) {
  BayesNetSpec spec;
  spec.variables = std::move(variables);
  spec.parents.resize(spec.variables.size());
  for (const auto& [child, pas] : parents) {
    const Index c = find_variable(spec.variables, child);
    for (const auto& p : pas) spec.parents[c].push_back(find_variable(spec.variables, p));
  }
  for (const auto& [name, _] : cpts) find_variable(spec.variables, name);

  spec.cpts.resize(spec.variables.size());
  for (Index i = 0; i < spec.variables.size(); ++i) {
    const auto& v = spec.variables[i];
    const std::size_t nconf = parent_configurations(spec, i);
    auto it = cpts.find(v.name);
    if (it == cpts.end()) {
      spec.cpts[i].assign(nconf, std::vector<double>(v.states.size(), 1.0 / v.states.size()));
      continue;
    }
    spec.cpts[i].resize(nconf);
    std::vector<bool> seen(nconf, false);
    for (const auto& [key, probs] : it->second) {
      // Key: comma-joined parent state names in parent order.
      std::vector<std::string> parts;
      if (!spec.parents[i].empty()) {
        std::size_t start = 0;
        while (true) {
          const auto pos = key.find(',', start);
          parts.push_back(key.substr(start, pos - start));
          if (pos == std::string::npos) break;
          start = pos + 1;
        }
      } else if (!key.empty()) {
        throw Error(ErrorCode::CptShapeMismatch,
                    "root variable '" + v.name + "' takes a single CPT keyed by \"\"");
      }
      if (parts.size() != spec.parents[i].size()) {
        throw Error(ErrorCode::CptShapeMismatch,
                    "CPT key '" + key + "' of '" + v.name + "' does not match its parents");
      }
      std::size_t c = 0;
      for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto& pv = spec.variables[spec.parents[i][k]];
        c = c * pv.states.size() + find_state(pv, parts[k]);
      }
      if (seen[c]) {
        throw Error(ErrorCode::CptShapeMismatch, "duplicate CPT key '" + key + "'");
      }
      seen[c] = true;
      spec.cpts[i][c] = probs;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw Error(ErrorCode::CptShapeMismatch,
                  "CPT of '" + v.name + "' misses parent configurations");
    }
  }
  return spec;
}

CompiledModel compile_bn(const BayesNetSpec& spec) {
  check_spec(spec);
  const std::size_t m = spec.variables.size();

  // Blocks: (variable, parent configuration) in that order.
  std::vector<std::vector<Index>> blocks;
  std::vector<std::vector<Index>> block_start(m);
  std::vector<Index> block_owner;
  std::vector<double> values;
  std::vector<std::string> labels;
  for (Index i = 0; i < m; ++i) {
    const std::size_t nconf = parent_configurations(spec, i);
    for (std::size_t c = 0; c < nconf; ++c) {
      block_start[i].push_back(values.size());
      std::vector<Index> block;
      for (Index s = 0; s < spec.variables[i].states.size(); ++s) {
        block.push_back(values.size());
        values.push_back(spec.cpts[i][c][s]);
        labels.push_back(parameter_label(spec, i, c, s));
      }
      blocks.push_back(std::move(block));
      block_owner.push_back(i);
    }
  }

  // Atoms: Cartesian product, last variable fastest.
  std::size_t q = 1;
  for (const auto& v : spec.variables) q *= v.states.size();
  AtomSpace space{spec.variables, {}};
  space.atom_states.reserve(q);
  std::vector<ExponentEntry> entries;
  entries.reserve(q * m);
  std::vector<std::string> atom_labels;
  atom_labels.reserve(q);
  std::vector<Index> states(m, 0);
  for (Index y = 0; y < q; ++y) {
    std::string label;
    for (Index i = 0; i < m; ++i) {
      std::size_t c = 0;
      for (Index p : spec.parents[i]) c = c * spec.variables[p].states.size() + states[p];
      entries.push_back({y, block_start[i][c] + states[i], 1});
      if (i) label += ",";
      label += spec.variables[i].name + "=" + spec.variables[i].states[states[i]];
    }
    space.atom_states.push_back(states);
    atom_labels.push_back(std::move(label));
    for (std::size_t i = m; i-- > 0;) {
      if (++states[i] < spec.variables[i].states.size()) break;
      states[i] = 0;
    }
  }

  auto partition = std::make_shared<const SimplexPartition>(std::move(blocks));
  const std::size_t k = values.size();
  CompiledModel out{
      MonomialModel(ExponentMatrix(q, k, std::move(entries)), partition, std::move(atom_labels)),
      ParameterVector(partition, std::move(values), std::move(labels)),
      ModelSource::BayesNet,
      std::move(space),
      std::move(block_owner),
      {}};
  return out;
}

AtomEvent atoms_matching(const AtomSpace& space, const Assignment& assignment) {
  std::vector<std::pair<Index, Index>> fixed;
  for (const auto& [var, state] : assignment) {
    const Index i = find_variable(space.variables, var);
    fixed.emplace_back(i, find_state(space.variables[i], state));
  }
  std::vector<Index> atoms;
  for (Index y = 0; y < space.atom_states.size(); ++y) {
    const auto& st = space.atom_states[y];
    if (std::all_of(fixed.begin(), fixed.end(),
                    [&](const auto& f) { return st[f.first] == f.second; })) {
      atoms.push_back(y);
    }
  }
  if (atoms.empty()) {
    throw Error(ErrorCode::EmptyEvent, "assignment is inconsistent (selects no atoms)");
  }
  return AtomEvent(std::move(atoms), space.atom_states.size());
}

}  // namespace mmsa
