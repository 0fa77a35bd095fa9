#include "mmsa/divergence.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "mmsa/error.hpp"

namespace mmsa {

namespace {

constexpr double kTiny = 1e-300;

void check_lengths(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch, "distributions have lengths " +
                                               std::to_string(a.size()) + " and " +
                                               std::to_string(b.size()));
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
  double s = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!(p_[i] >= kTiny) || !std::isfinite(p_[i])) {
      throw Error(ErrorCode::InvalidDistribution,
                  "entry " + std::to_string(i) + " is not strictly positive");
    }
    s += p_[i];
  }
  if (std::abs(s - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::InvalidDistribution, "distribution sums to " + std::to_string(s));
  }
}

Distribution distribution(const MonomialModel& model, const ParameterVector& theta) {
  return Distribution(atomic_probabilities(model, theta));
}

double kl_divergence(const Distribution& q, const Distribution& p) {
  check_lengths(q, p);
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) d += q[i] * std::log(q[i] / p[i]);
  return d < 0.0 ? 0.0 : d;
}

double cd_distance(const Distribution& p, const Distribution& q) {
  check_lengths(p, q);
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = std::log(p[i]) - std::log(q[i]);
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  return hi - lo;
}

PhiFunction::PhiFunction(std::string name, std::function<double(double)> phi)
    : name_(std::move(name)), phi_(std::move(phi)) {
  if (!phi_ || !(std::abs(phi_(1.0)) <= 1e-12)) {
    throw Error(ErrorCode::InvalidPhiFunction, "phi function '" + name_ + "' has phi(1) != 0");
  }
}

double phi_divergence(const Distribution& q, const Distribution& p, const PhiFunction& phi) {
  check_lengths(q, p);
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) d += p[i] * phi(q[i] / p[i]);
  return d;
}

namespace {

const std::map<std::string, PhiFunction, std::less<>>& registry() {
  static const std::map<std::string, PhiFunction, std::less<>> r = [] {
    std::map<std::string, PhiFunction, std::less<>> m;
    auto add = [&](std::string name, std::function<double(double)> f) {
      m.emplace(name, PhiFunction(name, std::move(f)));
    };
    add("xlogx", [](double x) { return x * std::log(x); });
    add("tv", [](double x) { return std::abs(x - 1.0); });
    add("chi2", [](double x) { return (x - 1.0) * (x - 1.0); });
    add("hellinger", [](double x) {
      const double r = std::sqrt(x) - 1.0;
      return r * r;
    });
    return m;
  }();
  return r;
}

}  // namespace

const PhiFunction& phi_function(std::string_view name) {
  const auto& r = registry();
  auto it = r.find(name);
  if (it == r.end()) {
    throw Error(ErrorCode::UnknownMetric, "unknown phi function '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> phi_function_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

std::string Metric::name() const {
  switch (kind) {
    case Kind::KL: return "kl";
    case Kind::CD: return "cd";
    case Kind::Phi: return "phi:" + phi;
  }
  return "";
}

Metric parse_metric(std::string_view text) {
  if (text == "kl") return {Metric::Kind::KL, {}};
  if (text == "cd") return {Metric::Kind::CD, {}};
  if (text.rfind("phi:", 0) == 0) {
    const std::string name(text.substr(4));
    phi_function(name);
    return {Metric::Kind::Phi, name};
  }
  throw Error(ErrorCode::UnknownMetric, "unknown metric '" + std::string(text) + "'");
}

double divergence(const Distribution& q, const Distribution& p, const Metric& metric) {
  switch (metric.kind) {
    case Metric::Kind::KL: return kl_divergence(q, p);
    case Metric::Kind::CD: return cd_distance(p, q);
    case Metric::Kind::Phi: return phi_divergence(q, p, phi_function(metric.phi));
  }
  return 0.0;
}

double divergence_between(const MonomialModel& model, const ParameterVector& theta_q,
                          const ParameterVector& theta_p, const Metric& metric) {
  theta_q.require_valid();
  theta_p.require_valid();
  return divergence(distribution(model, theta_q), distribution(model, theta_p), metric);
}

}  // namespace mmsa
