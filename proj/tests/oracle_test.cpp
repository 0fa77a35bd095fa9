#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mmsa/error.hpp"
#include "mmsa/sensitivity.hpp"
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

TEST(Oracle, FreeDimensions) {
  const CompiledModel m = reference_bn();
  const auto& part = m.model.partition();
  EXPECT_EQ(oracle_free_dimensions(part, {{0, 0.3}}), 1u);
  EXPECT_EQ(oracle_free_dimensions(part, {{0, 0.3}, {1, 0.3}}), 0u);
  EXPECT_EQ(oracle_free_dimensions(part, {{0, 0.3}, {3, 0.3}, {12, 0.3}}), 3u);
}

TEST(Oracle, ConditionallyDependentTreeMatchesProportional) {
  const CompiledModel m = two_stage_tree();
  const TargetMap targets{{0, 0.4}, {3, 0.2}};
  const ProjectionResult r = i_projection_oracle(m.model, m.theta, targets, 200);
  EXPECT_TRUE(r.matches_proportional);
  EXPECT_EQ(r.free_dimensions, 2u);
  // Grid, proportional point and uniform point (order-preserving is undefined
  // here: 0.4 exceeds the bound 1/3 for theta1).
  EXPECT_EQ(r.candidates, 199u * 199u + 2);
  EXPECT_NEAR(r.min_kl, r.proportional_kl, 1e-15);
  EXPECT_DOUBLE_EQ(r.block_steps[0], 0.6 / 200);
  // KL of the proportional point against a direct sum.
  const auto p = atomic_probabilities(m.model, m.theta);
  const auto q = atomic_probabilities(m.model, proportional_covariation(m.theta, targets));
  EXPECT_NEAR(r.proportional_kl, static_cast<double>(direct_kl(q, p)), 1e-14);
}

TEST(Oracle, OtherTreeBeatsProportional) {
  const CompiledModel m = two_stage_tree();
  const TargetMap targets{{1, 0.3}, {3, 0.2}};
  const ProjectionResult r = i_projection_oracle(m.model, m.theta, targets, 200);
  EXPECT_FALSE(r.matches_proportional);
  EXPECT_LT(r.min_kl, r.proportional_kl - 1e-6);
  EXPECT_NO_THROW(require_in_l_sensi(m.theta, targets, r.argmin_theta));
  const auto p = atomic_probabilities(m.model, m.theta);
  const auto q = atomic_probabilities(m.model, r.argmin_theta);
  EXPECT_NEAR(r.min_kl, static_cast<double>(direct_kl(q, p)), 1e-14);
}

TEST(Oracle, ResultDoesNotDependOnThreads) {
  const CompiledModel m = two_stage_tree();
  const TargetMap targets{{1, 0.3}, {3, 0.2}};
  const ProjectionResult one = i_projection_oracle(m.model, m.theta, targets, 120, 1);
  const ProjectionResult four = i_projection_oracle(m.model, m.theta, targets, 120, 4);
  EXPECT_EQ(one.min_kl, four.min_kl);
  EXPECT_EQ(one.argmin_theta.values(), four.argmin_theta.values());
}

TEST(Oracle, ForcedBlocksHaveNoFreedom) {
  const CompiledModel m = reference_bn();
  const TargetMap targets{{bn_y1(1), 0.3}, {bn_y1(2), 0.3}};
  const ProjectionResult r = i_projection_oracle(m.model, m.theta, targets, 10);
  EXPECT_EQ(r.free_dimensions, 0u);
  EXPECT_TRUE(r.matches_proportional);
  EXPECT_NEAR(r.min_kl, r.proportional_kl, 1e-15);
}

TEST(Oracle, IndependentCasesMatchProportional) {
  Gen g(31);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = g.independent_case();
    const TargetMap targets = g.targets(c.model.theta, c.varied);
    if (oracle_free_dimensions(c.model.model.partition(), targets) > 3) continue;
    const ProjectionResult r = i_projection_oracle(c.model.model, c.model.theta, targets, 30);
    EXPECT_TRUE(r.matches_proportional);
    // Ties with the proportional point are exact only up to summation rounding.
    EXPECT_LE(r.proportional_kl, r.min_kl + 1e-14 * std::max(1.0, r.min_kl))
        << "free dims " << r.free_dimensions << ", diff " << r.proportional_kl - r.min_kl;
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Oracle, Guards) {
  const CompiledModel m = reference_bn();
  EXPECT_EQ(code_of([&] { i_projection_oracle(m.model, m.theta, {{0, 0.3}}, 9); }),
            ErrorCode::GridTooCoarse);
  TargetMap wide;
  for (Index p : {bn_y3(1, 1, 1), bn_y3(1, 2, 1), bn_y3(1, 3, 1), bn_y3(1, 1, 2), bn_y3(1, 2, 2)}) {
    wide[p] = 0.2;
  }
  EXPECT_EQ(code_of([&] { i_projection_oracle(m.model, m.theta, wide, 20); }),
            ErrorCode::DimensionTooLarge);
  // Four free dimensions but far too many grid points.
  const TargetMap big{{bn_y1(1), 0.3}, {bn_y2(1, 1), 0.3}, {bn_y3(1, 1, 1), 0.3}, {bn_y3(1, 2, 1), 0.3}};
  EXPECT_EQ(code_of([&] { i_projection_oracle(m.model, m.theta, big, 100000); }),
            ErrorCode::DimensionTooLarge);
  EXPECT_EQ(code_of([&] { i_projection_oracle(m.model, m.theta, {{0, 1.5}}, 20); }),
            ErrorCode::TargetOutOfRange);
}
