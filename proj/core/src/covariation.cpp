#include "mmsa/covariation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mmsa/error.hpp"

namespace mmsa {

std::string_view scheme_name(Scheme s) noexcept {
  switch (s) {
    case Scheme::Proportional: return "proportional";
    case Scheme::Uniform: return "uniform";
    case Scheme::OrderPreserving: return "order_preserving";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "proportional") return Scheme::Proportional;
  if (name == "uniform") return Scheme::Uniform;
  if (name == "order_preserving" || name == "order-preserving") return Scheme::OrderPreserving;
  throw Error(ErrorCode::ParseError, "unknown covariation scheme '" + std::string(name) + "'");
}

namespace {

bool in_open_unit(double x) { return x > kPositivityMargin && x < 1.0 - kPositivityMargin; }

// Common checks for the multi-index schemes; returns (|theta_V|, |target|).
std::pair<double, double> check_block_args(std::span<const double> theta,
                                           std::span<const Index> varied,
                                           std::span<const double> targets) {
  if (varied.empty()) throw Error(ErrorCode::EmptyVariation, "no varied parameter in block");
  if (varied.size() != targets.size()) {
    throw Error(ErrorCode::ShapeMismatch, "varied positions and targets differ in length");
  }
  if (varied.size() >= theta.size()) {
    throw Error(ErrorCode::VariedWholeBlock,
                "every parameter of the block is varied; nothing is left to covary");
  }
  std::vector<bool> seen(theta.size(), false);
  double sum_theta = 0.0;
  double sum_target = 0.0;
  for (std::size_t i = 0; i < varied.size(); ++i) {
    const Index v = varied[i];
    if (v >= theta.size()) throw Error(ErrorCode::IndexOutOfRange, "varied position out of range");
    if (seen[v]) throw Error(ErrorCode::ShapeMismatch, "varied position listed twice");
    seen[v] = true;
    if (!in_open_unit(targets[i])) {
      throw Error(ErrorCode::TargetOutOfRange,
                  "target " + std::to_string(targets[i]) + " is not in (0,1)");
    }
    sum_theta += theta[v];
    sum_target += targets[i];
  }
  if (!in_open_unit(sum_target)) {
    throw Error(ErrorCode::TargetOutOfRange,
                "targets of one block sum to " + std::to_string(sum_target) + ", outside (0,1)");
  }
  return {sum_theta, sum_target};
}

}  // namespace

std::vector<double> covary_block_proportional(std::span<const double> theta,
                                              std::span<const Index> varied,
                                              std::span<const double> targets) {
  const auto [sum_theta, sum_target] = check_block_args(theta, varied, targets);
  const double residual = 1.0 - sum_theta;
  if (residual < kSimplexTolerance) {
    throw Error(ErrorCode::ZeroResidualMass,
                "varied parameters carry the whole block mass; proportional covariation is "
                "undefined");
  }
  const double scale = (1.0 - sum_target) / residual;
  std::vector<double> out(theta.begin(), theta.end());
  for (double& x : out) x *= scale;
  for (std::size_t i = 0; i < varied.size(); ++i) out[varied[i]] = targets[i];
  return out;
}

std::vector<double> covary_block_uniform(std::span<const double> theta,
                                         std::span<const Index> varied,
                                         std::span<const double> targets) {
  const auto sums = check_block_args(theta, varied, targets);
  const double share = (1.0 - sums.second) / static_cast<double>(theta.size() - varied.size());
  std::vector<double> out(theta.size(), share);
  for (std::size_t i = 0; i < varied.size(); ++i) out[varied[i]] = targets[i];
  return out;
}

namespace {

struct SortedFrame {
  std::vector<Index> order;  // sorted position -> original position
  std::size_t pos;           // 0-based sorted position of v
};

SortedFrame sorted_frame(std::span<const double> theta, Index v) {
  if (theta.size() < 2) throw Error(ErrorCode::ShapeMismatch, "block has fewer than two entries");
  if (v >= theta.size()) throw Error(ErrorCode::IndexOutOfRange, "varied position out of range");
  SortedFrame f{std::vector<Index>(theta.size()), 0};
  std::iota(f.order.begin(), f.order.end(), Index{0});
  std::stable_sort(f.order.begin(), f.order.end(),
                   [&](Index a, Index b) { return theta[a] < theta[b]; });
  f.pos = static_cast<std::size_t>(std::find(f.order.begin(), f.order.end(), v) - f.order.begin());
  if (f.pos + 1 == theta.size()) {
    throw Error(ErrorCode::OrderPreservingMaximum,
                "varied parameter is the largest of its block; order-preserving covariation "
                "requires a non-maximal parameter");
  }
  return f;
}

}  // namespace

double order_preserving_upper_bound(std::span<const double> theta, Index v) {
  const SortedFrame f = sorted_frame(theta, v);
  // 1-based position p gives 1 / (1 + n - p).
  return 1.0 / static_cast<double>(theta.size() - f.pos);
}

std::vector<double> covary_block_order_preserving(std::span<const double> theta, Index v,
                                                  double target) {
  const SortedFrame f = sorted_frame(theta, v);
  const std::size_t n = theta.size();
  const double theta_max = 1.0 / static_cast<double>(n - f.pos);
  if (!(target > kPositivityMargin && target < theta_max - kPositivityMargin)) {
    throw Error(ErrorCode::OrderPreservingDomain,
                "target " + std::to_string(target) + " outside the order-preserving domain (0, " +
                    std::to_string(theta_max) + ")");
  }
  const double tv = theta[v];
  std::vector<double> out(theta.begin(), theta.end());
  if (target == tv) return out;

  double suc = 0.0;
  for (std::size_t s = f.pos + 1; s < n; ++s) suc += theta[f.order[s]];

  for (std::size_t s = 0; s < n; ++s) {
    const Index j = f.order[s];
    const double x = theta[j];
    if (s == f.pos) {
      out[j] = target;
    } else if (target < tv) {
      out[j] = s < f.pos ? x * target / tv
                         : -x * (1.0 - suc) / suc * target / tv + x / suc;
    } else {
      const double w = (theta_max - target) / (theta_max - tv);
      out[j] = s < f.pos ? x * w : (x - theta_max) * w + theta_max;
    }
  }
  return out;
}

VariationSpec::VariationSpec(const SimplexPartition& partition, TargetMap targets,
                             Scheme default_scheme, std::map<Index, Scheme> block_schemes)
    : targets_(std::move(targets)),
      default_scheme_(default_scheme),
      block_schemes_(std::move(block_schemes)) {
  if (targets_.empty()) {
    throw Error(ErrorCode::EmptyVariation, "variation must vary at least one parameter");
  }
  std::map<Index, std::vector<Index>> per_block;
  for (const auto& [p, t] : targets_) {
    if (p >= partition.n_params()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "varied parameter index " + std::to_string(p) + " out of range");
    }
    if (!in_open_unit(t)) {
      throw Error(ErrorCode::TargetOutOfRange, "target for parameter " + std::to_string(p + 1) +
                                                   " is " + std::to_string(t) + ", not in (0,1)");
    }
    per_block[partition.block_of(p)].push_back(p);
  }
  for (const auto& [b, _] : block_schemes_) {
    if (b >= partition.n_blocks()) {
      throw Error(ErrorCode::IndexOutOfRange, "scheme given for unknown block " + std::to_string(b));
    }
  }
  for (const auto& [b, vs] : per_block) {
    touched_.push_back(b);
    if (vs.size() == partition.block(b).size()) {
      throw Error(ErrorCode::VariedWholeBlock,
                  "every parameter of block " + std::to_string(b + 1) + " is varied");
    }
    double sum = 0.0;
    for (Index p : vs) sum += targets_.at(p);
    if (!in_open_unit(sum)) {
      throw Error(ErrorCode::TargetOutOfRange, "targets in block " + std::to_string(b + 1) +
                                                   " sum to " + std::to_string(sum));
    }
    if (scheme_for(b) == Scheme::OrderPreserving && vs.size() > 1) {
      throw Error(ErrorCode::OrderPreservingMultiIndex,
                  "order-preserving covariation varies a single parameter per block; block " +
                      std::to_string(b + 1) + " has " + std::to_string(vs.size()));
    }
  }
}

Scheme VariationSpec::scheme_for(Index block) const {
  auto it = block_schemes_.find(block);
  return it == block_schemes_.end() ? default_scheme_ : it->second;
}

bool VariationSpec::all_proportional() const {
  return std::all_of(touched_.begin(), touched_.end(),
                     [&](Index b) { return scheme_for(b) == Scheme::Proportional; });
}

std::vector<Index> VariationSpec::varied() const {
  std::vector<Index> v;
  for (const auto& [p, _] : targets_) v.push_back(p);
  return v;
}

CovariationResult covary(const ParameterVector& theta, const VariationSpec& spec) {
  theta.require_valid();
  const SimplexPartition& part = theta.partition();
  if (!spec.targets().empty() && spec.targets().rbegin()->first >= part.n_params()) {
    throw Error(ErrorCode::IndexOutOfRange, "variation does not fit the parameter vector");
  }
  std::vector<double> values = theta.values();
  CovariationResult result{theta, spec.touched_blocks(), {}};
  for (Index b : spec.touched_blocks()) {
    const auto block = part.block(b);
    const std::vector<double> local = theta.block_values(b);
    std::vector<Index> positions;
    std::vector<double> targets;
    double sum_theta = 0.0;
    double sum_target = 0.0;
    for (std::size_t i = 0; i < block.size(); ++i) {
      auto it = spec.targets().find(block[i]);
      if (it == spec.targets().end()) continue;
      positions.push_back(i);
      targets.push_back(it->second);
      sum_theta += local[i];
      sum_target += it->second;
    }
    std::vector<double> out;
    try {
      switch (spec.scheme_for(b)) {
        case Scheme::Proportional:
          out = covary_block_proportional(local, positions, targets);
          break;
        case Scheme::Uniform:
          out = covary_block_uniform(local, positions, targets);
          break;
        case Scheme::OrderPreserving:
          out = covary_block_order_preserving(local, positions.front(), targets.front());
          break;
      }
      for (double x : out) {
        if (!in_open_unit(x)) {
          throw Error(ErrorCode::TargetOutOfRange,
                      "covaried parameter " + std::to_string(x) + " leaves (0,1)");
        }
      }
    } catch (const Error& e) {
      throw Error(e.code(), "block " + std::to_string(b + 1) + " (" + theta.label(block[0]) +
                                ", ...): " + e.what());
    }
    for (std::size_t i = 0; i < block.size(); ++i) values[block[i]] = out[i];
    result.scale_factors.push_back((1.0 - sum_target) / (1.0 - sum_theta));
  }
  result.theta_new = theta.with_values(std::move(values));
  return result;
}

CovariationResult covary(const MonomialModel& model, const ParameterVector& theta,
                         const VariationSpec& spec) {
  if (model.n_params() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match the model");
  }
  return covary(theta, spec);
}

}  // namespace mmsa
