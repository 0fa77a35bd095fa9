#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmsa/classifier.hpp"
#include "mmsa/covariation.hpp"
#include "mmsa/divergence.hpp"
#include "mmsa/monomial_model.hpp"

namespace mmsa {

/// Varied set V, the union C of blocks it touches, and the rest F.
struct IndexGeometry {
  std::vector<Index> varied;          // V, sorted
  std::vector<Index> touched_blocks;  // blocks meeting V, sorted
  std::vector<Index> covaried;        // C, sorted
  std::vector<Index> fixed;           // F, sorted
  /// varied_in_block[i] = V intersected with touched_blocks[i].
  std::vector<std::vector<Index>> varied_in_block;
  /// Touched blocks with exactly one non-varied parameter (its value is
  /// forced by the targets).
  std::vector<Index> forced_blocks;

  bool is_covaried(Index p) const;
  bool is_varied(Index p) const;
};

IndexGeometry index_geometry(const SimplexPartition& partition, std::span<const Index> varied);
IndexGeometry index_geometry(const MonomialModel& model, std::span<const Index> varied);

/// A set H of covaried parameters used together by at least one atom, and
/// the atoms Y_H whose monomial uses exactly those covaried parameters.
struct HSet {
  std::vector<Index> params;
  std::vector<Index> atoms;
};

struct HSupport {
  /// Sorted by params; the atom sets are disjoint.
  std::vector<HSet> sets;
  /// Atoms using no covaried parameter.
  std::vector<Index> untouched_atoms;
};

HSupport h_support(const MonomialModel& model, const IndexGeometry& geometry);

enum class AnalysisKind { Independent, FullyDependent, ConditionallyDependent, Other };

std::string_view analysis_kind_name(AnalysisKind kind) noexcept;

struct AnalysisClass {
  AnalysisKind kind = AnalysisKind::Other;
  /// Short explanation of the verdict.
  std::string witness;
  /// Conditionally dependent: the block ordering that matched.
  std::vector<Index> block_order;
  /// False when the ordering search was skipped (too many touched blocks).
  bool exhaustive = true;
};

/// Requires a multilinear, weakly regular model.
AnalysisClass classify_analysis(const MonomialModel& model, std::span<const Index> varied);

struct CurvePoint {
  std::vector<double> x;  // target value(s)
  bool present = false;   // false where the scheme is undefined
  double probability = 0.0;
  double kl = 0.0;  // D(P~ || P)
  double cd = 0.0;
  std::string error;  // error name for absent points
};

struct SensitivityCurve {
  std::vector<Index> varied;
  Scheme scheme = Scheme::Proportional;
  std::vector<Index> event_atoms;
  std::size_t resolution = 0;
  std::vector<CurvePoint> points;
};

/// Grid points k/(resolution+1), k = 1..resolution, per varied coordinate;
/// two varied coordinates give the full product grid. Throws GridTooCoarse
/// for resolution < 2 and ShapeMismatch for more than two varied indices.
SensitivityCurve sensitivity_function(const MonomialModel& model, const ParameterVector& theta,
                                      std::span<const Index> varied, Scheme scheme,
                                      const AtomEvent& event, std::size_t resolution);

/// Proportional covariation of theta towards the targets.
ParameterVector proportional_covariation(const ParameterVector& theta, const TargetMap& targets);

/// Throws OutsideLSensi unless q agrees with theta on F and with the targets
/// on V (within 1e-12) and is a valid point.
void require_in_l_sensi(const ParameterVector& theta, const TargetMap& targets,
                        const ParameterVector& q);

/// Closed-form residual of the Pythagorean condition. Equals
/// D(Q||P) - D(Q||P~) - D(P~||P) for P~ the proportional covariation.
double pythagorean_residual(const MonomialModel& model, const ParameterVector& theta,
                            const TargetMap& targets, const ParameterVector& q);

/// The same quantity computed directly from the three divergences.
double pythagorean_gap(const MonomialModel& model, const ParameterVector& theta,
                       const TargetMap& targets, const ParameterVector& q);

/// Random point of L_sensi: free coordinates of every touched block are
/// uniform on the sub-simplex of mass 1 - |targets in block|.
ParameterVector sample_l_sensi(const ParameterVector& theta, const TargetMap& targets,
                               std::mt19937_64& rng);

struct ProjectionResult {
  ParameterVector argmin_theta;
  double min_kl = 0.0;
  double proportional_kl = 0.0;
  /// Largest per-block grid step.
  double grid_step = 0.0;
  std::vector<double> block_steps;  // per touched block
  bool matches_proportional = false;
  std::size_t free_dimensions = 0;
  std::size_t candidates = 0;
};

inline constexpr std::size_t kOracleMaxFreeDimensions = 4;
inline constexpr std::size_t kOracleMinGrid = 10;

/// Free dimensions of the oracle search: sum over touched blocks of
/// (#non-varied - 1).
std::size_t oracle_free_dimensions(const SimplexPartition& partition, const TargetMap& targets);

/// Exhaustive grid search for argmin D(Q||P) over L_sensi. The proportional
/// point, and the uniform and order-preserving points where those schemes
/// are defined, are always among the candidates. `threads` = 0 uses the hardware
/// concurrency; the result does not depend on the thread count.
ProjectionResult i_projection_oracle(const MonomialModel& model, const ParameterVector& theta,
                                     const TargetMap& targets, std::size_t grid_m,
                                     unsigned threads = 0);

struct ResidualStats {
  std::size_t samples = 0;
  double max_abs_residual = 0.0;
  double max_abs_gap = 0.0;
  /// max |residual - gap|
  double max_abs_mismatch = 0.0;
  double min_residual = 0.0;
  double max_residual = 0.0;
};

ResidualStats residual_statistics(const MonomialModel& model, const ParameterVector& theta,
                                  const TargetMap& targets, std::size_t samples,
                                  std::uint64_t seed);

struct NaiveBayesReport {
  AnalysisClass classification;
  ResidualStats residuals;
  std::optional<ProjectionResult> oracle;
};

/// Checks that proportional covariation of feature parameters is the
/// I-projection: samples residuals and, when the search is small enough,
/// runs the oracle. Rejects variations of class (or super-parent)
/// parameters with ClassParameterVaried.
NaiveBayesReport verify_naive_bayes_optimality(const ClassifierSpec& classifier,
                                               const ParameterVector& theta,
                                               const TargetMap& targets, std::size_t samples,
                                               std::uint64_t seed, std::size_t oracle_grid = 20);

struct AnalysisOptions {
  std::size_t samples = 20;
  std::uint64_t seed = 1;
  bool run_oracle = true;
  std::size_t grid = 50;
};

struct AnalysisReport {
  IndexGeometry geometry;
  AnalysisClass classification;
  ParameterVector proportional;
  double proportional_kl = 0.0;
  double proportional_cd = 0.0;
  ResidualStats residuals;
  std::optional<ProjectionResult> projection;
  /// Set when the oracle was requested but skipped (dimension guard).
  std::string projection_skipped;
};

AnalysisReport analyze(const MonomialModel& model, const ParameterVector& theta,
                       const TargetMap& targets, const AnalysisOptions& options);

}  // namespace mmsa
