#include "generators.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

namespace mmsa::testing {

double Gen::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

std::size_t Gen::integer(std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
}

bool Gen::coin(double p) { return uniform(0.0, 1.0) < p; }

std::vector<double> Gen::simplex(std::size_t n, double floor) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(n);
  double s = 0.0;
  for (double& v : x) s += (v = e(rng_));
  const double free = 1.0 - floor * static_cast<double>(n);
  for (double& v : x) v = floor + free * v / s;
  // Put the rounding error on the largest entry so the sum is as close to
  // one as doubles allow.
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  *std::max_element(x.begin(), x.end()) += 1.0 - total;
  return x;
}

std::vector<Index> Gen::proper_subset(std::size_t n, std::size_t max_size) {
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  std::shuffle(all.begin(), all.end(), rng_);
  const std::size_t k = integer(1, std::min(max_size, n - 1));
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

BayesNetSpec Gen::bayes_net(std::size_t max_vars, std::size_t max_states, std::size_t max_parents) {
  BayesNetSpec spec;
  const std::size_t m = integer(1, max_vars);
  for (std::size_t i = 0; i < m; ++i) {
    Variable v{"X" + std::to_string(i + 1), {}};
    const std::size_t k = integer(2, max_states);
    for (std::size_t s = 0; s < k; ++s) v.states.push_back("s" + std::to_string(s + 1));
    spec.variables.push_back(v);
    std::vector<Index> pa;
    for (Index p = 0; p < i; ++p) {
      if (pa.size() < max_parents && coin()) pa.push_back(p);
    }
    spec.parents.push_back(pa);
  }
  spec.cpts.resize(m);
  for (Index i = 0; i < m; ++i) {
    const std::size_t nconf = parent_configurations(spec, i);
    for (std::size_t c = 0; c < nconf; ++c) {
      spec.cpts[i].push_back(simplex(spec.variables[i].states.size()));
    }
  }
  return spec;
}

StagedTreeSpec Gen::staged_tree(std::size_t max_depth, std::size_t max_degree) {
  StagedTreeSpec spec;
  struct Pending {
    std::string id;
    std::size_t depth;
  };
  std::vector<Pending> queue{{"v0", 0}};
  std::size_t next = 1;
  // depth -> degree -> vertices
  std::map<std::size_t, std::map<std::size_t, std::vector<std::string>>> by_level;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const Pending cur = queue[q];
    TreeVertex v{cur.id, {}, {}};
    const bool internal = cur.depth == 0 || (cur.depth < max_depth && coin(0.6));
    if (internal) {
      const std::size_t k = integer(2, max_degree);
      for (std::size_t i = 0; i < k; ++i) {
        const std::string id = "v" + std::to_string(next++);
        v.children.push_back(id);
        queue.push_back({id, cur.depth + 1});
      }
      by_level[cur.depth][k].push_back(cur.id);
    }
    spec.vertices.push_back(std::move(v));
  }
  for (auto& [depth, groups] : by_level) {
    for (auto& [degree, ids] : groups) {
      if (ids.size() < 2 || !coin(0.7)) {
        for (const auto& id : ids) spec.probabilities[id] = simplex(degree);
        continue;
      }
      std::shuffle(ids.begin(), ids.end(), rng_);
      const std::size_t take = integer(2, ids.size());
      spec.stages.emplace_back(ids.begin(), ids.begin() + static_cast<long>(take));
      spec.probabilities["stage:" + std::to_string(spec.stages.size() - 1)] = simplex(degree);
      for (std::size_t i = take; i < ids.size(); ++i) spec.probabilities[ids[i]] = simplex(degree);
    }
  }
  return spec;
}

ClassifierSpec Gen::naive_bayes(std::size_t features, std::size_t states, std::size_t classes) {
  ClassifierSpec spec;
  spec.class_variable.name = "C";
  for (std::size_t c = 0; c < classes; ++c) spec.class_variable.states.push_back("c" + std::to_string(c + 1));
  spec.cpts["C"][""] = simplex(classes);
  for (std::size_t f = 0; f < features; ++f) {
    Variable v{"F" + std::to_string(f + 1), {}};
    for (std::size_t s = 0; s < states; ++s) v.states.push_back("s" + std::to_string(s + 1));
    for (const auto& cs : spec.class_variable.states) spec.cpts[v.name][cs] = simplex(states);
    spec.features.push_back(std::move(v));
  }
  return spec;
}

TargetMap Gen::targets(const ParameterVector& theta, const std::vector<Index>& varied) {
  const SimplexPartition& part = theta.partition();
  std::map<Index, std::vector<Index>> by_block;
  for (Index p : varied) by_block[part.block_of(p)].push_back(p);
  TargetMap out;
  for (const auto& [b, ps] : by_block) {
    // Mass left for the varied coordinates, then split it.
    const double total = uniform(0.05, 0.9);
    const std::vector<double> share = simplex(ps.size(), 0.0);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      out[ps[i]] = std::max(0.01 * total, share[i] * total);
    }
  }
  return out;
}

Gen::Case Gen::independent_case() {
  // Either a subset of one block, or parameters of one variable under
  // different parent configurations (never used by a common atom).
  while (true) {
    BayesNetSpec spec = bayes_net(3, 3, 2);
    CompiledModel m = compile_bn(spec);
    const auto& part = m.model.partition();
    if (part.n_blocks() > 5) continue;
    std::vector<Index> varied;
    if (coin()) {
      const Index b = integer(0, part.n_blocks() - 1);
      for (Index pos : proper_subset(part.block(b).size(), 3)) varied.push_back(part.block(b)[pos]);
    } else {
      std::vector<Index> owners_with_many;
      for (Index i = 0; i < spec.variables.size(); ++i) {
        if (parent_configurations(spec, i) > 1) owners_with_many.push_back(i);
      }
      if (owners_with_many.empty()) continue;
      const Index var = owners_with_many[integer(0, owners_with_many.size() - 1)];
      for (Index b = 0; b < part.n_blocks(); ++b) {
        if (m.block_owner[b] == var && coin(0.7)) {
          for (Index pos : proper_subset(part.block(b).size(), 2)) varied.push_back(part.block(b)[pos]);
        }
      }
      if (varied.empty()) continue;
    }
    return {std::move(m), std::move(varied)};
  }
}

Gen::Case Gen::fully_dependent_case() {
  // Two root variables plus an optional child of one of them.
  while (true) {
    BayesNetSpec spec;
    for (int i = 0; i < 2; ++i) {
      Variable v{"R" + std::to_string(i + 1), {}};
      const std::size_t k = integer(2, 3);
      for (std::size_t s = 0; s < k; ++s) v.states.push_back("s" + std::to_string(s + 1));
      spec.variables.push_back(v);
      spec.parents.push_back({});
    }
    if (coin()) {
      spec.variables.push_back({"Z", {"a", "b"}});
      spec.parents.push_back({integer(0, 1)});
    }
    spec.cpts.resize(spec.variables.size());
    for (Index i = 0; i < spec.variables.size(); ++i) {
      for (std::size_t c = 0; c < parent_configurations(spec, i); ++c) {
        spec.cpts[i].push_back(simplex(spec.variables[i].states.size()));
      }
    }
    CompiledModel m = compile_bn(spec);
    if (m.model.partition().n_blocks() > 5) continue;
    std::vector<Index> varied;
    for (Index b = 0; b < 2; ++b) {
      const auto block = m.model.partition().block(b);
      for (Index pos : proper_subset(block.size(), 2)) varied.push_back(block[pos]);
    }
    return {std::move(m), std::move(varied)};
  }
}

Gen::Case Gen::conditional_case() {
  // Y1 -> Y2: vary theta_{Y1=a} and part of the column P(Y2 | Y1=a).
  BayesNetSpec spec;
  const std::size_t k1 = integer(2, 3);
  const std::size_t k2 = k1 == 3 ? 2 : integer(2, 3);
  Variable y1{"Y1", {}}, y2{"Y2", {}};
  for (std::size_t s = 0; s < k1; ++s) y1.states.push_back("s" + std::to_string(s + 1));
  for (std::size_t s = 0; s < k2; ++s) y2.states.push_back("s" + std::to_string(s + 1));
  spec.variables = {y1, y2};
  spec.parents = {{}, {0}};
  spec.cpts.resize(2);
  spec.cpts[0].push_back(simplex(k1));
  for (std::size_t c = 0; c < k1; ++c) spec.cpts[1].push_back(simplex(k2));
  CompiledModel m = compile_bn(spec);
  const Index a = integer(0, k1 - 1);
  std::vector<Index> varied{a};
  const auto column = m.model.partition().block(1 + a);
  for (Index pos : proper_subset(column.size(), 2)) varied.push_back(column[pos]);
  return {std::move(m), std::move(varied)};
}

std::optional<Gen::Case> Gen::tree_case(std::size_t max_blocks) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    const StagedTreeSpec spec = staged_tree(2, 3);
    std::optional<CompiledModel> compiled;
    try {
      compiled = compile_staged_tree(spec);
    } catch (const std::exception&) {
      continue;
    }
    CompiledModel& m = *compiled;
    const auto& part = m.model.partition();
    if (part.n_blocks() < 2 || part.n_blocks() > max_blocks) continue;
    std::vector<Index> varied;
    const std::size_t touched = integer(1, std::min<std::size_t>(3, part.n_blocks()));
    std::vector<Index> blocks(part.n_blocks());
    std::iota(blocks.begin(), blocks.end(), Index{0});
    std::shuffle(blocks.begin(), blocks.end(), rng_);
    for (std::size_t t = 0; t < touched; ++t) {
      const auto block = part.block(blocks[t]);
      for (Index pos : proper_subset(block.size(), 1)) varied.push_back(block[pos]);
    }
    return Case{std::move(m), std::move(varied)};
  }
  return std::nullopt;
}

}  // namespace mmsa::testing
