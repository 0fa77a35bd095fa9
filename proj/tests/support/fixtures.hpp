#pragma once

#include <filesystem>
#include <string>

#include "mmsa/bayes_net.hpp"
#include "mmsa/staged_tree.hpp"

namespace mmsa::testing {

std::filesystem::path data_path(const std::string& name);

/// Three ternary variables, complete DAG Y1 -> Y2 -> Y3, Y1 -> Y3, with the
/// reference CPT values.
BayesNetSpec reference_bn_spec();
CompiledModel reference_bn();

/// Root edges theta1 (to an internal vertex w), theta2, theta3 (leaves);
/// w has edges psi1..psi3 to leaves. theta = (0.2,0.5,0.3), psi = (0.4,0.4,0.2).
StagedTreeSpec two_stage_tree_spec();
CompiledModel two_stage_tree();

/// Root with three children in one stage, each with three leaves.
StagedTreeSpec symmetric_tree_spec();

/// Depth-three ternary tree with stages {v7,v8} and {v10,v11}.
StagedTreeSpec shared_stage_tree_spec();

// Parameter indices in the compiled reference BN (1-based subscripts).
inline Index bn_y1(int i) { return static_cast<Index>(i - 1); }
inline Index bn_y2(int j, int i) { return static_cast<Index>(3 + 3 * (i - 1) + (j - 1)); }
inline Index bn_y3(int l, int j, int i) {
  return static_cast<Index>(12 + 9 * (i - 1) + 3 * (j - 1) + (l - 1));
}

}  // namespace mmsa::testing
