#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmsa/monomial_model.hpp"

namespace mmsa {

struct Variable {
  std::string name;
  std::vector<std::string> states;
};

/// Variable-level view of an atom set that is a Cartesian product of state
/// spaces. atom_states[y][i] is the state index of variable i in atom y.
struct AtomSpace {
  std::vector<Variable> variables;
  std::vector<std::vector<Index>> atom_states;
};

enum class ModelSource { BayesNet, StagedTree, Classifier, RawMonomial };

/// Output of every frontend compiler.
struct CompiledModel {
  MonomialModel model;
  ParameterVector theta;
  ModelSource source = ModelSource::RawMonomial;
  /// Present for Bayesian networks and classifiers.
  std::optional<AtomSpace> atom_space;
  /// Owning variable (BN) or stage (tree) of each block.
  std::vector<Index> block_owner;
  /// Staged trees only: (vertex id, child id) -> parameter index.
  std::map<std::pair<std::string, std::string>, Index> tree_edges;
};

/// Regularity with blocks grouped by their owning variable or stage.
inline bool check_regular(const CompiledModel& m, Regularity mode) {
  return check_regular(m.model, mode, m.block_owner);
}

/// Partial assignment of state names to variable names.
using Assignment = std::vector<std::pair<std::string, std::string>>;

/// Atoms consistent with the assignment; an empty assignment selects every
/// atom. Throws UnknownVariable / UnknownState.
AtomEvent atoms_matching(const AtomSpace& space, const Assignment& assignment);

}  // namespace mmsa
