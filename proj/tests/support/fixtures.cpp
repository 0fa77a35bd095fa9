#include "fixtures.hpp"

namespace mmsa::testing {

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(MMSA_DATA_DIR) / name;
}

BayesNetSpec reference_bn_spec() {
  const std::vector<std::string> s{"1", "2", "3"};
  BayesNetSpec spec;
  spec.variables = {{"Y1", s}, {"Y2", s}, {"Y3", s}};
  spec.parents = {{}, {0}, {0, 1}};
  spec.cpts.resize(3);
  spec.cpts[0] = {{0.2, 0.3, 0.5}};
  spec.cpts[1] = {{0.2, 0.3, 0.5}, {0.3, 0.3, 0.4}, {0.7, 0.2, 0.1}};
  // Configurations (Y1, Y2) with Y2 fastest.
  spec.cpts[2] = {{0.1, 0.2, 0.7}, {0.1, 0.4, 0.5}, {0.8, 0.1, 0.1},
                  {0.1, 0.3, 0.6}, {0.3, 0.6, 0.1}, {0.7, 0.2, 0.1},
                  {0.2, 0.3, 0.5}, {0.3, 0.5, 0.2}, {0.4, 0.5, 0.1}};
  return spec;
}

CompiledModel reference_bn() { return compile_bn(reference_bn_spec()); }

StagedTreeSpec two_stage_tree_spec() {
  StagedTreeSpec spec;
  spec.vertices = {{"r", {"w", "y4", "y5"}, {"theta1", "theta2", "theta3"}},
                   {"w", {"y1", "y2", "y3"}, {"psi1", "psi2", "psi3"}},
                   {"y1", {}, {}},
                   {"y2", {}, {}},
                   {"y3", {}, {}},
                   {"y4", {}, {}},
                   {"y5", {}, {}}};
  spec.probabilities = {{"r", {0.2, 0.5, 0.3}}, {"w", {0.4, 0.4, 0.2}}};
  return spec;
}

CompiledModel two_stage_tree() { return compile_staged_tree(two_stage_tree_spec()); }

StagedTreeSpec symmetric_tree_spec() {
  StagedTreeSpec spec;
  spec.vertices.push_back({"v0", {"v1", "v2", "v3"}, {}});
  int leaf = 4;
  for (int k = 1; k <= 3; ++k) {
    TreeVertex v{"v" + std::to_string(k), {}, {}};
    for (int i = 0; i < 3; ++i) v.children.push_back("v" + std::to_string(leaf++));
    spec.vertices.push_back(v);
  }
  for (int k = 4; k < leaf; ++k) spec.vertices.push_back({"v" + std::to_string(k), {}, {}});
  spec.stages = {{"v1", "v2", "v3"}};
  spec.probabilities = {{"v0", {0.3, 0.3, 0.4}}, {"stage:0", {0.2, 0.3, 0.5}}};
  return spec;
}

StagedTreeSpec shared_stage_tree_spec() {
  StagedTreeSpec spec;
  spec.vertices.push_back({"v0", {"v1", "v2", "v3"}, {}});
  int next = 4;
  for (int k = 1; k <= 3; ++k) {
    TreeVertex v{"v" + std::to_string(k), {}, {}};
    for (int i = 0; i < 3; ++i) v.children.push_back("v" + std::to_string(next++));
    spec.vertices.push_back(v);
  }
  int leaf = 13;
  for (int k = 4; k <= 12; ++k) {
    TreeVertex v{"v" + std::to_string(k), {}, {}};
    for (int i = 0; i < 3; ++i) v.children.push_back("v" + std::to_string(leaf++));
    spec.vertices.push_back(v);
  }
  for (int k = 13; k < leaf; ++k) spec.vertices.push_back({"v" + std::to_string(k), {}, {}});
  spec.stages = {{"v7", "v8"}, {"v10", "v11"}};
  const std::vector<std::vector<double>> d{{0.3, 0.3, 0.4}, {0.2, 0.5, 0.3}, {0.6, 0.3, 0.1},
                                           {0.1, 0.1, 0.8}, {0.25, 0.25, 0.5}, {0.5, 0.2, 0.3},
                                           {0.4, 0.4, 0.2}, {0.3, 0.6, 0.1}, {0.2, 0.2, 0.6},
                                           {0.7, 0.2, 0.1}, {0.35, 0.35, 0.3}};
  const std::vector<std::string> keys{"v0", "v1", "v2",      "v3",  "v4", "v5",
                                      "v6", "stage:0", "v9", "stage:1", "v12"};
  for (std::size_t i = 0; i < keys.size(); ++i) spec.probabilities[keys[i]] = d[i];
  return spec;
}

}  // namespace mmsa::testing
