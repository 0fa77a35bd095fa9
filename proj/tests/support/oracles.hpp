#pragma once

// Independent reference computations used as test oracles. Everything here
// works from first principles (joint enumeration, direct sums in long
// double) and shares no code with the library beyond the spec structs.

#include <functional>
#include <vector>

#include "mmsa/bayes_net.hpp"
#include "mmsa/covariation.hpp"

namespace mmsa::testing {

/// Joint probability of every full assignment by the chain rule, in the
/// same order as the compiled atoms (last variable fastest).
std::vector<double> bn_joint(const BayesNetSpec& spec);

long double direct_kl(const std::vector<double>& q, const std::vector<double>& p);
long double direct_cd(const std::vector<double>& p, const std::vector<double>& q);
long double direct_phi(const std::vector<double>& q, const std::vector<double>& p,
                       const std::function<long double(long double)>& phi);

/// Proportional covariation of one block from the closed form
/// theta_j * (1 - sum targets) / (1 - sum theta_V) for j not varied.
std::vector<double> direct_proportional(const std::vector<double>& block,
                                        const std::vector<std::size_t>& varied,
                                        const std::vector<double>& targets);

}  // namespace mmsa::testing
