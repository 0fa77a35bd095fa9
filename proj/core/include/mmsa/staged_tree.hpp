#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmsa/compiled_model.hpp"

namespace mmsa {

struct TreeVertex {
  std::string id;
  std::vector<std::string> children;
  /// Optional edge labels aligned with children.
  std::vector<std::string> labels;
};

/// A rooted event tree whose non-leaf vertices are grouped into stages.
/// Non-leaf vertices absent from `stages` form singleton stages.
struct StagedTreeSpec {
  std::vector<TreeVertex> vertices;
  std::vector<std::vector<std::string>> stages;
  /// Edge probabilities keyed by a vertex id, or by "stage:<i>" for the i-th
  /// (0-based) entry of `stages`. One key per stage is enough; several keys
  /// for the same stage must agree.
  std::map<std::string, std::vector<double>> probabilities;
};

/// Atoms are the root-to-leaf paths in depth-first order. Blocks are stages
/// in breadth-first discovery order; a stage's parameters are shared by all
/// of its vertices. Rejects trees where two vertices of one stage lie on a
/// common root-to-leaf path (the resulting model is not multilinear).
CompiledModel compile_staged_tree(const StagedTreeSpec& spec);

}  // namespace mmsa
