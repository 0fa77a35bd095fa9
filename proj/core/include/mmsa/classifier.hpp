#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mmsa/bayes_net.hpp"

namespace mmsa {

enum class ClassifierStructure { NaiveBayes, Spode, General };

struct ClassifierSpec {
  Variable class_variable;
  std::vector<Variable> features;
  ClassifierStructure structure = ClassifierStructure::NaiveBayes;
  /// Spode only: name of the feature that parents every other feature.
  std::string super_parent;
  /// General only: extra (parent, child) edges between variables. The class
  /// is always a parent of every feature.
  std::vector<std::pair<std::string, std::string>> edges;
  /// Empty entries mean uniform CPTs.
  KeyedCpts cpts;
};

/// The class variable comes first; features follow in listed order (general
/// structures are sorted topologically, ties in listed order).
BayesNetSpec build_classifier(const ClassifierSpec& spec);

/// Compiles through build_classifier + compile_bn and tags the source.
CompiledModel compile_classifier(const ClassifierSpec& spec);

}  // namespace mmsa
