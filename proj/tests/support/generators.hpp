#pragma once

// Hand-rolled random generators for property tests.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mmsa/bayes_net.hpp"
#include "mmsa/classifier.hpp"
#include "mmsa/covariation.hpp"
#include "mmsa/sensitivity.hpp"
#include "mmsa/staged_tree.hpp"

namespace mmsa::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& engine() { return rng_; }
  double uniform(double lo, double hi);
  /// Inclusive.
  std::size_t integer(std::size_t lo, std::size_t hi);
  bool coin(double p = 0.5);

  /// Point of the open simplex with every entry >= floor.
  std::vector<double> simplex(std::size_t n, double floor = 0.02);
  /// Random non-empty proper subset of {0..n-1}, at most max_size entries.
  std::vector<Index> proper_subset(std::size_t n, std::size_t max_size);

  BayesNetSpec bayes_net(std::size_t max_vars, std::size_t max_states, std::size_t max_parents);
  /// Random tree of depth <= max_depth; internal vertices have 2..max_degree
  /// children; same-degree vertices at one depth are merged into stages at
  /// random.
  StagedTreeSpec staged_tree(std::size_t max_depth, std::size_t max_degree);
  ClassifierSpec naive_bayes(std::size_t features, std::size_t states, std::size_t classes);

  /// Random valid targets for the given varied set: every target and every
  /// block total stays away from 0 and 1.
  TargetMap targets(const ParameterVector& theta, const std::vector<Index>& varied);

  /// Varied sets of a requested class, built from structure (BNs) so that
  /// each class is reached without rejection. Returns the model too.
  struct Case {
    CompiledModel model;
    std::vector<Index> varied;
  };
  Case independent_case();
  Case fully_dependent_case();
  Case conditional_case();
  /// Random varied set on a random small staged tree (any class).
  std::optional<Case> tree_case(std::size_t max_blocks);

 private:
  std::mt19937_64 rng_;
};

}  // namespace mmsa::testing
