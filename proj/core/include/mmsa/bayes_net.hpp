#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmsa/compiled_model.hpp"

namespace mmsa {

/// CPTs keyed by variable name, then by the comma-joined parent states
/// (in the variable's parent order; "" for root variables).
using KeyedCpts = std::map<std::string, std::map<std::string, std::vector<double>>>;

struct BayesNetSpec {
  std::vector<Variable> variables;
  /// parents[i] lists indices of earlier variables.
  std::vector<std::vector<Index>> parents;
  /// cpts[i][c] is the distribution of variable i under parent configuration
  /// c; configurations are enumerated with the last-listed parent fastest.
  std::vector<std::vector<std::vector<double>>> cpts;
};

std::size_t parent_configurations(const BayesNetSpec& spec, Index var);

/// Builds a spec from parent names and keyed CPTs. A missing variable entry
/// in `cpts` means uniform distributions for that variable.
BayesNetSpec bayes_net_from_keyed(std::vector<Variable> variables,
                                  const std::map<std::string, std::vector<std::string>>& parents,
                                  const KeyedCpts& cpts);

/// Atoms are the Cartesian product of state spaces in variable order (last
/// variable fastest); one block per (variable, parent configuration).
CompiledModel compile_bn(const BayesNetSpec& spec);

}  // namespace mmsa
