#pragma once

// File formats, request parsing and JSON/CSV serialization.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmsa/classifier.hpp"
#include "mmsa/compiled_model.hpp"
#include "mmsa/covariation.hpp"
#include "mmsa/divergence.hpp"
#include "mmsa/sensitivity.hpp"
#include "mmsa/staged_tree.hpp"

namespace mmsa {

using json = nlohmann::json;

enum class ModelFormat { Raw, BayesNet, StagedTree, Classifier };

std::string_view model_format_name(ModelFormat f) noexcept;

struct LoadedModel {
  CompiledModel compiled;
  ModelFormat format = ModelFormat::Raw;
  /// Classifier files keep their spec for the naive Bayes check.
  std::optional<ClassifierSpec> classifier;
};

/// Detects the format from the keys present ("exponents" raw, "vertices"
/// staged tree, "structure" classifier, "variables" Bayesian network) unless
/// a "format" field names it. Throws ParseError or the compiler's errors.
LoadedModel load_model(const json& doc);
LoadedModel load_model_file(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);
json parse_json(std::string_view text);

BayesNetSpec bayes_net_from_json(const json& doc);
StagedTreeSpec staged_tree_from_json(const json& doc);
ClassifierSpec classifier_from_json(const json& doc);
CompiledModel raw_model_from_json(const json& doc);

/// Raw monomial-model document of a compiled model (0-based indices).
json raw_model_to_json(const CompiledModel& m);
/// Model summary: blocks, labels, values and structural checks.
json model_summary(const LoadedModel& m);

/// Resolves a parameter key: an exact label wins; otherwise "theta<N>" is
/// the 1-based index N and a bare integer is a 0-based index. Throws
/// UnknownParameter. A label that shadows a numeric reading adds a warning.
Index resolve_parameter(const ParameterVector& theta, std::string_view key,
                        std::vector<std::string>* warnings = nullptr);

struct ParsedVariation {
  TargetMap targets;
  Scheme scheme = Scheme::Proportional;
  std::map<Index, Scheme> block_schemes;
  std::vector<std::string> warnings;

  VariationSpec spec(const SimplexPartition& partition) const;
};

/// {"vary": {key: value}, "scheme": name | {block_key: name}} where a
/// block_key is "block<N>" (1-based) or any parameter key of the block.
ParsedVariation parse_variation(const json& doc, const ParameterVector& theta);

/// Splits "key=value" at the last '=' when the tail is a number and the
/// head resolves; otherwise the whole text is a key with no value.
std::pair<Index, std::optional<double>> parse_vary_argument(const ParameterVector& theta,
                                                            std::string_view text,
                                                            std::vector<std::string>* warnings);

/// Events: "Var=state,Var=state" on models with variables; otherwise a
/// comma-separated list of atom labels or "#N" (1-based atom numbers).
AtomEvent parse_event(const CompiledModel& m, std::string_view text);
/// JSON events: a string as above, an object {var: state}, or an array of
/// atom labels / 0-based atom indices.
AtomEvent parse_event_json(const CompiledModel& m, const json& event);

std::string format_double(double x);

json to_json(const ValidationReport& report);
json to_json(const CovariationResult& r, const VariationSpec& spec);
json to_json(const SensitivityCurve& curve, const CompiledModel& m);
json to_json(const AnalysisClass& c, const IndexGeometry& g, const ParameterVector& theta);
json to_json(const ResidualStats& s);
json to_json(const ProjectionResult& r, const IndexGeometry& g);
json to_json(const AnalysisReport& r);
json to_json(const NaiveBayesReport& r, const IndexGeometry& g);

/// Columns: one per varied parameter, scheme, event_probability, kl, cd.
/// Absent points keep their grid values and leave the rest empty.
std::string curves_to_csv(const std::vector<SensitivityCurve>& curves, const ParameterVector& theta);

}  // namespace mmsa
