#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mmsa/covariation.hpp"
#include "mmsa/divergence.hpp"
#include "mmsa/error.hpp"
#include "oracles.hpp"

using namespace mmsa;
using namespace mmsa::testing;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no mmsa::Error thrown";
  return ErrorCode::ParseError;
}

}  // namespace

TEST(Distribution, RejectsZerosAndBadSums) {
  EXPECT_EQ(code_of([] { Distribution({}); }), ErrorCode::InvalidDistribution);
  EXPECT_EQ(code_of([] { Distribution({0.0, 1.0}); }), ErrorCode::InvalidDistribution);
  EXPECT_EQ(code_of([] { Distribution({1e-301, 1.0}); }), ErrorCode::InvalidDistribution);
  EXPECT_EQ(code_of([] { Distribution({0.5, 0.6}); }), ErrorCode::InvalidDistribution);
  EXPECT_EQ(code_of([] { Distribution({NAN, 1.0}); }), ErrorCode::InvalidDistribution);
  EXPECT_NO_THROW(Distribution({1e-300, 1.0}));
}

TEST(KL, HandComputedValue) {
  const Distribution q({0.5, 0.5});
  const Distribution p({0.25, 0.75});
  EXPECT_NEAR(kl_divergence(q, p), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-16);
  EXPECT_EQ(kl_divergence(q, q), 0.0);
  EXPECT_EQ(code_of([&] { kl_divergence(q, Distribution({0.2, 0.3, 0.5})); }),
            ErrorCode::LengthMismatch);
}

TEST(CD, HandComputedValueAndSymmetry) {
  const Distribution p({0.2, 0.3, 0.5});
  const Distribution q({0.4, 0.3, 0.3});
  const double expected = std::log(0.5 / 0.3) - std::log(0.2 / 0.4);
  EXPECT_NEAR(cd_distance(p, q), expected, 1e-15);
  EXPECT_NEAR(cd_distance(q, p), expected, 1e-15);
  EXPECT_EQ(cd_distance(p, p), 0.0);
}

TEST(CD, ExtremeRatiosStayFinite) {
  const Distribution p({1e-300, 1.0 - 1e-300});
  const Distribution q({0.5, 0.5});
  EXPECT_TRUE(std::isfinite(cd_distance(p, q)));
  EXPECT_NEAR(cd_distance(p, q), 300 * std::log(10.0), 1e-9);
}

TEST(Phi, BuiltInsAgainstDirectSums) {
  Gen g(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = g.integer(2, 12);
    const auto qv = g.simplex(n, 1e-3);
    const auto pv = g.simplex(n, 1e-3);
    const Distribution q(qv), p(pv);
    EXPECT_NEAR(phi_divergence(q, p, phi_function("tv")),
                static_cast<double>(direct_phi(qv, pv, [](long double x) { return std::fabs(x - 1); })),
                1e-12);
    EXPECT_NEAR(phi_divergence(q, p, phi_function("chi2")),
                static_cast<double>(direct_phi(qv, pv, [](long double x) { return (x - 1) * (x - 1); })),
                1e-12);
    EXPECT_NEAR(phi_divergence(q, p, phi_function("hellinger")),
                static_cast<double>(direct_phi(qv, pv, [](long double x) {
                  const long double r = std::sqrt(x) - 1;
                  return r * r;
                })),
                1e-12);
    EXPECT_NEAR(phi_divergence(q, p, phi_function("xlogx")), kl_divergence(q, p), 1e-12);
  }
}

TEST(Phi, RegistryAndCustomFunctions) {
  EXPECT_EQ(phi_function_names(), (std::vector<std::string>{"chi2", "hellinger", "tv", "xlogx"}));
  EXPECT_EQ(code_of([] { phi_function("nope"); }), ErrorCode::UnknownMetric);
  EXPECT_EQ(code_of([] { PhiFunction("shifted", [](double x) { return x; }); }),
            ErrorCode::InvalidPhiFunction);
  const PhiFunction neg_log("neglog", [](double x) { return -std::log(x); });
  const Distribution q({0.3, 0.7});
  const Distribution p({0.6, 0.4});
  // -ln gives the reverse KL.
  EXPECT_NEAR(phi_divergence(q, p, neg_log), kl_divergence(p, q), 1e-15);
}

TEST(Metric, ParsingAndDispatch) {
  EXPECT_EQ(parse_metric("kl").kind, Metric::Kind::KL);
  EXPECT_EQ(parse_metric("cd").name(), "cd");
  EXPECT_EQ(parse_metric("phi:chi2").name(), "phi:chi2");
  EXPECT_EQ(code_of([] { parse_metric("phi:zzz"); }), ErrorCode::UnknownMetric);
  EXPECT_EQ(code_of([] { parse_metric("js"); }), ErrorCode::UnknownMetric);
  const Distribution q({0.3, 0.7});
  const Distribution p({0.6, 0.4});
  EXPECT_EQ(divergence(q, p, parse_metric("kl")), kl_divergence(q, p));
  EXPECT_EQ(divergence(q, p, parse_metric("cd")), cd_distance(p, q));
}

TEST(ModelDivergence, CovariedBayesNet) {
  const CompiledModel m = reference_bn();
  const VariationSpec spec(m.model.partition(), {{bn_y2(2, 2), 0.5}});
  const ParameterVector t = covary(m.theta, spec).theta_new;
  const double kl = divergence_between(m.model, t, m.theta, parse_metric("kl"));
  const auto qv = atomic_probabilities(m.model, t);
  const auto pv = atomic_probabilities(m.model, m.theta);
  EXPECT_NEAR(kl, static_cast<double>(direct_kl(qv, pv)), 1e-14);
  // One CPT column changed: the divergence is P(Y1=2) times the column KL.
  // The column (0.3, 0.3, 0.4) becomes (0.3 * 5/7, 0.5, 0.4 * 5/7).
  const double col = 0.5 * std::log(5.0 / 3.0) + 0.5 * std::log(5.0 / 7.0);
  EXPECT_NEAR(kl, 0.3 * col, 1e-14);
  EXPECT_NEAR(divergence_between(m.model, t, m.theta, parse_metric("cd")), std::log(7.0 / 3.0),
              1e-13);
}
