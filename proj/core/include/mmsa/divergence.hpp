#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mmsa/monomial_model.hpp"

namespace mmsa {

/// Strictly positive probability vector summing to one.
class Distribution {
 public:
  /// Throws InvalidDistribution on entries below 1e-300 or a sum off by
  /// more than kSimplexTolerance.
  explicit Distribution(std::vector<double> p);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](Index i) const { return p_[i]; }
  const std::vector<double>& values() const noexcept { return p_; }

 private:
  std::vector<double> p_;
};

/// Atomic probabilities of (model, theta) as a distribution.
Distribution distribution(const MonomialModel& model, const ParameterVector& theta);

/// D(Q||P) = sum Q ln(Q/P).
double kl_divergence(const Distribution& q, const Distribution& p);

/// ln max(P/Q) - ln min(P/Q).
double cd_distance(const Distribution& p, const Distribution& q);

class PhiFunction {
 public:
  /// Throws InvalidPhiFunction unless |phi(1)| <= 1e-12.
  PhiFunction(std::string name, std::function<double(double)> phi);

  const std::string& name() const noexcept { return name_; }
  double operator()(double x) const { return phi_(x); }

 private:
  std::string name_;
  std::function<double(double)> phi_;
};

/// sum P * phi(Q/P).
double phi_divergence(const Distribution& q, const Distribution& p, const PhiFunction& phi);

/// Built-in functions: "xlogx", "tv", "chi2", "hellinger". Throws UnknownMetric.
const PhiFunction& phi_function(std::string_view name);
std::vector<std::string> phi_function_names();

struct Metric {
  enum class Kind { KL, CD, Phi };
  Kind kind = Kind::KL;
  std::string phi;  // Phi only

  std::string name() const;
};

/// "kl", "cd" or "phi:<name>". Throws UnknownMetric.
Metric parse_metric(std::string_view text);

/// Divergence of the first distribution from the second: D(Q||P) for KL
/// and phi with Q = theta_q; CD is symmetric.
double divergence(const Distribution& q, const Distribution& p, const Metric& metric);

double divergence_between(const MonomialModel& model, const ParameterVector& theta_q,
                          const ParameterVector& theta_p, const Metric& metric);

}  // namespace mmsa
