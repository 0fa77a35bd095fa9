#include "mmsa/staged_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <set>
#include <unordered_map>

#include "mmsa/error.hpp"

namespace mmsa {

namespace {

constexpr Index kNone = static_cast<Index>(-1);

struct TreeIndex {
  std::unordered_map<std::string, Index> by_id;
  std::vector<std::vector<Index>> children;
  Index root = kNone;
};

TreeIndex index_tree(const StagedTreeSpec& spec) {
  TreeIndex t;
  if (spec.vertices.empty()) throw Error(ErrorCode::NotATree, "tree has no vertices");
  for (Index i = 0; i < spec.vertices.size(); ++i) {
    if (!t.by_id.emplace(spec.vertices[i].id, i).second) {
      throw Error(ErrorCode::NotATree, "duplicate vertex id '" + spec.vertices[i].id + "'");
    }
  }
  std::vector<unsigned> in_degree(spec.vertices.size(), 0);
  t.children.resize(spec.vertices.size());
  for (Index i = 0; i < spec.vertices.size(); ++i) {
    const auto& v = spec.vertices[i];
    if (!v.labels.empty() && v.labels.size() != v.children.size()) {
      throw Error(ErrorCode::NotATree, "vertex '" + v.id + "' has mismatched edge labels");
    }
    if (v.children.size() == 1) {
      throw Error(ErrorCode::StageDegreeMismatch,
                  "vertex '" + v.id + "' has a single outgoing edge");
    }
    for (const auto& c : v.children) {
      auto it = t.by_id.find(c);
      if (it == t.by_id.end()) {
        throw Error(ErrorCode::NotATree, "vertex '" + v.id + "' has unknown child '" + c + "'");
      }
      if (++in_degree[it->second] > 1) {
        throw Error(ErrorCode::NotATree, "vertex '" + c + "' has more than one parent");
      }
      t.children[i].push_back(it->second);
    }
  }
  for (Index i = 0; i < in_degree.size(); ++i) {
    if (in_degree[i] == 0) {
      if (t.root != kNone) throw Error(ErrorCode::NotATree, "tree has more than one root");
      t.root = i;
    }
  }
  if (t.root == kNone) throw Error(ErrorCode::NotATree, "tree has no root (cycle)");

  std::vector<bool> seen(spec.vertices.size(), false);
  std::vector<Index> stack{t.root};
  std::size_t reached = 0;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    if (seen[v]) throw Error(ErrorCode::NotATree, "graph contains a cycle");
    seen[v] = true;
    ++reached;
    for (Index c : t.children[v]) stack.push_back(c);
  }
  if (reached != spec.vertices.size()) {
    throw Error(ErrorCode::NotATree, "some vertices are not reachable from the root");
  }
  return t;
}

}  // namespace

CompiledModel compile_staged_tree(const StagedTreeSpec& spec) {
  const TreeIndex t = index_tree(spec);
  const std::size_t nv = spec.vertices.size();

  // Stage membership; unlisted non-leaf vertices become singleton stages.
  std::vector<Index> stage_of(nv, kNone);
  std::vector<std::vector<Index>> stage_members;
  for (Index s = 0; s < spec.stages.size(); ++s) {
    if (spec.stages[s].empty()) throw Error(ErrorCode::NotATree, "stage list contains an empty stage");
    stage_members.emplace_back();
    for (const auto& id : spec.stages[s]) {
      auto it = t.by_id.find(id);
      if (it == t.by_id.end()) throw Error(ErrorCode::NotATree, "stage lists unknown vertex '" + id + "'");
      const Index v = it->second;
      if (t.children[v].empty()) {
        throw Error(ErrorCode::NotATree, "leaf '" + id + "' cannot belong to a stage");
      }
      if (stage_of[v] != kNone) {
        throw Error(ErrorCode::NotATree, "vertex '" + id + "' belongs to two stages");
      }
      stage_of[v] = s;
      stage_members.back().push_back(v);
    }
  }
  for (Index v = 0; v < nv; ++v) {
    if (!t.children[v].empty() && stage_of[v] == kNone) {
      stage_of[v] = stage_members.size();
      stage_members.push_back({v});
    }
  }
  for (const auto& members : stage_members) {
    for (Index v : members) {
      if (t.children[v].size() != t.children[members.front()].size()) {
        throw Error(ErrorCode::StageDegreeMismatch,
                    "vertices '" + spec.vertices[members.front()].id + "' and '" +
                        spec.vertices[v].id + "' share a stage but differ in out-degree");
      }
    }
  }

  // Edge probabilities per stage.
  std::vector<std::vector<double>> stage_probs(stage_members.size());
  for (const auto& [key, probs] : spec.probabilities) {
    Index s = kNone;
    if (key.rfind("stage:", 0) == 0) {
      try {
        std::size_t pos = 0;
        const auto idx = std::stoul(key.substr(6), &pos);
        if (pos == key.size() - 6 && idx < spec.stages.size()) s = idx;
      } catch (const std::exception&) {
      }
      if (s == kNone) throw Error(ErrorCode::NotATree, "probability key '" + key + "' names no stage");
    } else {
      auto it = t.by_id.find(key);
      if (it == t.by_id.end()) {
        throw Error(ErrorCode::NotATree, "probability key '" + key + "' names no vertex");
      }
      s = stage_of[it->second];
      if (s == kNone) {
        throw Error(ErrorCode::NotATree, "probabilities given for leaf '" + key + "'");
      }
    }
    const std::size_t degree = t.children[stage_members[s].front()].size();
    if (probs.size() != degree) {
      throw Error(ErrorCode::CptShapeMismatch,
                  "probabilities for '" + key + "' have " + std::to_string(probs.size()) +
                      " entries, expected " + std::to_string(degree));
    }
    double sum = 0.0;
    for (double p : probs) {
      if (!(p > kPositivityMargin && p < 1.0 - kPositivityMargin)) {
        throw Error(ErrorCode::NonSimplexCpt,
                    "probabilities for '" + key + "' contain a non-positive or unit entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw Error(ErrorCode::NonSimplexCpt,
                  "probabilities for '" + key + "' sum to " + std::to_string(sum));
    }
    auto& slot = stage_probs[s];
    if (slot.empty()) {
      slot = probs;
    } else {
      for (std::size_t j = 0; j < degree; ++j) {
        if (std::abs(slot[j] - probs[j]) > kSimplexTolerance) {
          throw Error(ErrorCode::NonSimplexCpt,
                      "conflicting probabilities for stage of '" + key + "'");
        }
      }
    }
  }
  for (Index s = 0; s < stage_members.size(); ++s) {
    if (stage_probs[s].empty()) {
      throw Error(ErrorCode::CptShapeMismatch,
                  "no probabilities for the stage of vertex '" +
                      spec.vertices[stage_members[s].front()].id + "'");
    }
  }

  // Blocks in breadth-first stage discovery order.
  std::vector<Index> stage_block(stage_members.size(), kNone);
  std::vector<Index> stage_rep(stage_members.size(), kNone);
  std::vector<std::vector<Index>> blocks;
  std::vector<Index> block_owner;
  std::vector<Index> block_start;
  std::size_t k = 0;
  {
    std::deque<Index> queue{t.root};
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      if (t.children[v].empty()) continue;
      const Index s = stage_of[v];
      if (stage_block[s] == kNone) {
        stage_block[s] = blocks.size();
        stage_rep[s] = v;
        block_owner.push_back(s);
        block_start.push_back(k);
        std::vector<Index> block;
        for (std::size_t j = 0; j < t.children[v].size(); ++j) block.push_back(k++);
        blocks.push_back(std::move(block));
      }
      for (Index c : t.children[v]) queue.push_back(c);
    }
  }

  std::vector<double> values(k);
  std::vector<std::string> edge_labels(k);
  std::vector<std::string> fallback(k);
  bool all_labeled = true;
  for (Index s = 0; s < stage_members.size(); ++s) {
    const Index rep = stage_rep[s];
    const auto& rv = spec.vertices[rep];
    for (std::size_t j = 0; j < rv.children.size(); ++j) {
      const Index p = block_start[stage_block[s]] + j;
      values[p] = stage_probs[s][j];
      if (rv.labels.empty()) {
        all_labeled = false;
        fallback[p] = rv.id + "->" + rv.children[j];
      } else {
        edge_labels[p] = rv.labels[j];
        fallback[p] = rv.id + ":" + rv.labels[j];
      }
    }
  }
  std::vector<std::string> labels = fallback;
  if (all_labeled) {
    std::set<std::string> distinct(edge_labels.begin(), edge_labels.end());
    if (distinct.size() == k) labels = edge_labels;
  }

  // Root-to-leaf paths, depth-first; reject a stage repeated along a path.
  std::vector<ExponentEntry> entries;
  std::vector<std::string> atom_labels;
  std::map<std::pair<std::string, std::string>, Index> tree_edges;
  for (Index v = 0; v < nv; ++v) {
    for (std::size_t j = 0; j < t.children[v].size(); ++j) {
      tree_edges[{spec.vertices[v].id, spec.vertices[t.children[v][j]].id}] =
          block_start[stage_block[stage_of[v]]] + j;
    }
  }
  struct Frame {
    Index vertex;
    std::vector<Index> params;
    std::vector<Index> stages;
  };
  std::vector<Frame> stack{{t.root, {}, {}}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const Index v = f.vertex;
    if (t.children[v].empty()) {
      const Index y = atom_labels.size();
      for (Index p : f.params) entries.push_back({y, p, 1});
      atom_labels.push_back(spec.vertices[v].id);
      continue;
    }
    const Index s = stage_of[v];
    if (std::find(f.stages.begin(), f.stages.end(), s) != f.stages.end()) {
      throw Error(ErrorCode::SameStageOnPath,
                  "vertex '" + spec.vertices[v].id +
                      "' shares a stage with one of its ancestors; the staged tree is not "
                      "multilinear");
    }
    // Push in reverse so that children are visited in listed order.
    for (std::size_t j = t.children[v].size(); j-- > 0;) {
      Frame next{t.children[v][j], f.params, f.stages};
      next.params.push_back(block_start[stage_block[s]] + j);
      next.stages.push_back(s);
      stack.push_back(std::move(next));
    }
  }

  auto partition = std::make_shared<const SimplexPartition>(std::move(blocks));
  const std::size_t q = atom_labels.size();
  return CompiledModel{
      MonomialModel(ExponentMatrix(q, k, std::move(entries)), partition, std::move(atom_labels)),
      ParameterVector(partition, std::move(values), std::move(labels)),
      ModelSource::StagedTree,
      std::nullopt,
      std::move(block_owner),
      std::move(tree_edges)};
}

}  // namespace mmsa
