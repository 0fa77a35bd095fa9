#include "mmsa/classifier.hpp"

#include <algorithm>
#include <map>

#include "mmsa/error.hpp"

namespace mmsa {

namespace {

Index feature_index(const ClassifierSpec& spec, const std::string& name) {
  for (Index i = 0; i < spec.features.size(); ++i) {
    if (spec.features[i].name == name) return i;
  }
  throw Error(ErrorCode::UnknownVariable, "unknown feature '" + name + "'");
}

}  // namespace

BayesNetSpec build_classifier(const ClassifierSpec& spec) {
  const std::string& cls = spec.class_variable.name;
  for (const auto& f : spec.features) {
    if (f.name == cls) {
      throw Error(ErrorCode::CptShapeMismatch, "feature '" + f.name + "' shadows the class");
    }
  }
  const std::size_t n = spec.features.size();
  // Feature-level parent lists (feature indices), class parent implied.
  std::vector<std::vector<Index>> fparents(n);
  switch (spec.structure) {
    case ClassifierStructure::NaiveBayes:
      break;
    case ClassifierStructure::Spode: {
      const Index sp = feature_index(spec, spec.super_parent);
      for (Index i = 0; i < n; ++i) {
        if (i != sp) fparents[i].push_back(sp);
      }
      break;
    }
    case ClassifierStructure::General:
      for (const auto& [from, to] : spec.edges) {
        if (to == cls) {
          throw Error(ErrorCode::FeatureToClassEdge,
                      "edge " + from + " -> " + to + " gives the class a parent");
        }
        if (from == cls) {
          feature_index(spec, to);
          continue;  // implied
        }
        const Index a = feature_index(spec, from);
        const Index b = feature_index(spec, to);
        if (a == b) throw Error(ErrorCode::CyclicGraph, "self loop on '" + from + "'");
        if (std::find(fparents[b].begin(), fparents[b].end(), a) == fparents[b].end()) {
          fparents[b].push_back(a);
        }
      }
      break;
  }

  // Kahn's algorithm; the smallest listed index goes first among ready features.
  std::vector<Index> order;
  std::vector<std::size_t> pending(n);
  for (Index i = 0; i < n; ++i) pending[i] = fparents[i].size();
  std::vector<bool> placed(n, false);
  while (order.size() < n) {
    Index next = n;
    for (Index i = 0; i < n; ++i) {
      if (!placed[i] && pending[i] == 0) {
        next = i;
        break;
      }
    }
    if (next == n) throw Error(ErrorCode::CyclicGraph, "feature edges contain a cycle");
    placed[next] = true;
    order.push_back(next);
    for (Index j = 0; j < n; ++j) {
      if (std::count(fparents[j].begin(), fparents[j].end(), next)) --pending[j];
    }
  }

  std::vector<Variable> variables{spec.class_variable};
  std::map<std::string, std::vector<std::string>> parents;
  for (Index i : order) {
    variables.push_back(spec.features[i]);
    auto& pa = parents[spec.features[i].name];
    pa.push_back(cls);
    for (Index p : fparents[i]) pa.push_back(spec.features[p].name);
  }
  return bayes_net_from_keyed(std::move(variables), parents, spec.cpts);
}

CompiledModel compile_classifier(const ClassifierSpec& spec) {
  CompiledModel out = compile_bn(build_classifier(spec));
  out.source = ModelSource::Classifier;
  return out;
}

}  // namespace mmsa
