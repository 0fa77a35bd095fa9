#pragma once

#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mmsa/monomial_model.hpp"

namespace mmsa {

enum class Scheme { Proportional, Uniform, OrderPreserving };

std::string_view scheme_name(Scheme s) noexcept;
/// Accepts "proportional", "uniform", "order_preserving". Throws ParseError.
Scheme parse_scheme(std::string_view name);

/// Varied parameter index -> target value.
using TargetMap = std::map<Index, double>;

// Single-block schemes. `theta` is one simplex block, `varied` holds
// positions inside that block.

std::vector<double> covary_block_proportional(std::span<const double> theta,
                                              std::span<const Index> varied,
                                              std::span<const double> targets);

std::vector<double> covary_block_uniform(std::span<const double> theta,
                                         std::span<const Index> varied,
                                         std::span<const double> targets);

/// `v` is a position in the original (unsorted) block. The block is sorted
/// ascending with ties broken by position; the result is reported back in
/// the original order.
std::vector<double> covary_block_order_preserving(std::span<const double> theta, Index v,
                                                  double target);

/// Largest admissible target for order-preserving covariation of position v.
double order_preserving_upper_bound(std::span<const double> theta, Index v);

/// Varied parameters with targets and a scheme per touched block. Validated
/// against a partition on construction.
class VariationSpec {
 public:
  VariationSpec(const SimplexPartition& partition, TargetMap targets,
                Scheme default_scheme = Scheme::Proportional,
                std::map<Index, Scheme> block_schemes = {});

  const TargetMap& targets() const noexcept { return targets_; }
  /// Touched blocks in increasing order.
  const std::vector<Index>& touched_blocks() const noexcept { return touched_; }
  Scheme scheme_for(Index block) const;
  Scheme default_scheme() const noexcept { return default_scheme_; }
  bool all_proportional() const;
  std::vector<Index> varied() const;

 private:
  TargetMap targets_;
  std::vector<Index> touched_;
  Scheme default_scheme_;
  std::map<Index, Scheme> block_schemes_;
};

struct CovariationResult {
  ParameterVector theta_new;
  std::vector<Index> touched_blocks;
  /// Per touched block: (1 - |target_V|) / (1 - |theta_V|). Reported for
  /// every scheme; it is the actual rescaling only under proportional.
  std::vector<double> scale_factors;
};

CovariationResult covary(const ParameterVector& theta, const VariationSpec& spec);

/// Same, with model/theta shape checked first.
CovariationResult covary(const MonomialModel& model, const ParameterVector& theta,
                         const VariationSpec& spec);

}  // namespace mmsa
