#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmsa::testing {

std::vector<double> bn_joint(const BayesNetSpec& spec) {
  const std::size_t m = spec.variables.size();
  std::size_t total = 1;
  for (const auto& v : spec.variables) total *= v.states.size();
  std::vector<double> out;
  out.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<std::size_t> st(m);
    std::size_t rest = flat;
    for (std::size_t i = m; i-- > 0;) {
      st[i] = rest % spec.variables[i].states.size();
      rest /= spec.variables[i].states.size();
    }
    long double p = 1.0L;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t c = 0;
      for (Index pa : spec.parents[i]) c = c * spec.variables[pa].states.size() + st[pa];
      p *= spec.cpts[i][c][st[i]];
    }
    out.push_back(static_cast<double>(p));
  }
  return out;
}

long double direct_kl(const std::vector<double>& q, const std::vector<double>& p) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < q.size(); ++i) {
    s += static_cast<long double>(q[i]) * std::log(static_cast<long double>(q[i]) / p[i]);
  }
  return s;
}

long double direct_cd(const std::vector<double>& p, const std::vector<double>& q) {
  long double hi = -std::numeric_limits<long double>::infinity();
  long double lo = std::numeric_limits<long double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double r = static_cast<long double>(p[i]) / q[i];
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  return std::log(hi / lo);
}

long double direct_phi(const std::vector<double>& q, const std::vector<double>& p,
                       const std::function<long double(long double)>& phi) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < q.size(); ++i) {
    s += static_cast<long double>(p[i]) * phi(static_cast<long double>(q[i]) / p[i]);
  }
  return s;
}

std::vector<double> direct_proportional(const std::vector<double>& block,
                                        const std::vector<std::size_t>& varied,
                                        const std::vector<double>& targets) {
  long double old_v = 0.0L, new_v = 0.0L;
  for (std::size_t i = 0; i < varied.size(); ++i) {
    old_v += block[varied[i]];
    new_v += targets[i];
  }
  std::vector<double> out(block.size());
  for (std::size_t j = 0; j < block.size(); ++j) {
    out[j] = static_cast<double>(block[j] * (1.0L - new_v) / (1.0L - old_v));
  }
  for (std::size_t i = 0; i < varied.size(); ++i) out[varied[i]] = targets[i];
  return out;
}

}  // namespace mmsa::testing
