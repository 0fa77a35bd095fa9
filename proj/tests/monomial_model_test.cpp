#include <gtest/gtest.h>

#include <memory>

#include "fixtures.hpp"
#include "mmsa/error.hpp"
#include "mmsa/monomial_model.hpp"

using namespace mmsa;

namespace {

PartitionPtr partition(std::vector<std::vector<Index>> blocks) {
  return std::make_shared<const SimplexPartition>(std::move(blocks));
}

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

// Two binary blocks, four atoms: a product of two coins.
MonomialModel two_coins() {
  auto part = partition({{0, 1}, {2, 3}});
  std::vector<ExponentEntry> e;
  Index y = 0;
  for (Index a : {0, 1}) {
    for (Index b : {2, 3}) {
      e.push_back({y, a, 1});
      e.push_back({y, b, 1});
      ++y;
    }
  }
  return MonomialModel(ExponentMatrix(4, 4, e), part);
}

}  // namespace

TEST(ExponentMatrix, StoresRowsSortedByParameter) {
  ExponentMatrix m(2, 3, {{0, 2, 1}, {0, 0, 2}, {1, 1, 1}});
  ASSERT_EQ(m.row(0).size(), 2u);
  EXPECT_EQ(m.row(0)[0].param, 0u);
  EXPECT_EQ(m.row(0)[0].exponent, 2u);
  EXPECT_EQ(m.exponent(0, 2), 1u);
  EXPECT_EQ(m.exponent(1, 0), 0u);
  EXPECT_EQ(m.nonzeros(), 3u);
}

TEST(ExponentMatrix, RejectsMalformedInput) {
  EXPECT_EQ(code_of([] { ExponentMatrix(0, 2, {}); }), ErrorCode::InvalidExponentMatrix);
  EXPECT_EQ(code_of([] { ExponentMatrix(1, 2, {{0, 5, 1}}); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of([] { ExponentMatrix(1, 2, {{0, 0, 0}}); }), ErrorCode::InvalidExponentMatrix);
  EXPECT_EQ(code_of([] { ExponentMatrix(1, 3, {{0, 0, 1}, {0, 0, 1}}); }),
            ErrorCode::InvalidExponentMatrix);
  // Empty row.
  EXPECT_EQ(code_of([] { ExponentMatrix(2, 2, {{0, 0, 1}}); }), ErrorCode::InvalidExponentMatrix);
  // Row of all ones.
  EXPECT_EQ(code_of([] { ExponentMatrix(1, 2, {{0, 0, 1}, {0, 1, 1}}); }),
            ErrorCode::InvalidExponentMatrix);
}

TEST(SimplexPartition, RequiresCoveringBlocksOfSizeTwo) {
  EXPECT_EQ(code_of([] { SimplexPartition({}); }), ErrorCode::InvalidPartition);
  EXPECT_EQ(code_of([] { SimplexPartition({{0}, {1, 2}}); }), ErrorCode::InvalidPartition);
  EXPECT_EQ(code_of([] { SimplexPartition({{0, 1}, {1, 2}}); }), ErrorCode::InvalidPartition);
  EXPECT_EQ(code_of([] { SimplexPartition({{0, 2}}); }), ErrorCode::InvalidPartition);
  SimplexPartition p({{0, 1}, {2, 3, 4}});
  EXPECT_EQ(p.block_of(3), 1u);
  EXPECT_EQ(p.n_params(), 5u);
  EXPECT_EQ(code_of([&] { p.block_of(9); }), ErrorCode::IndexOutOfRange);
}

TEST(ParameterVector, ReportsViolationsWithoutThrowing) {
  auto part = partition({{0, 1}, {2, 3}});
  ParameterVector ok(part, {0.3, 0.7, 0.5, 0.5});
  EXPECT_TRUE(ok.is_valid());
  ParameterVector bad(part, {0.3, 0.6, 0.0, 1.0});
  EXPECT_FALSE(bad.is_valid());
  EXPECT_FALSE(bad.violations().empty());
  EXPECT_EQ(code_of([&] { bad.require_valid(); }), ErrorCode::SimplexViolation);
  EXPECT_EQ(code_of([&] { ParameterVector(part, {0.5, 0.5}); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(ok.label(2), "theta3");
}

TEST(MonomialModel, EvaluatesAtomsAsProducts) {
  const MonomialModel m = two_coins();
  ParameterVector theta(m.partition_ptr(), {0.3, 0.7, 0.4, 0.6});
  const auto p = atomic_probabilities(m, theta);
  ASSERT_EQ(p.size(), 4u);
  EXPECT_DOUBLE_EQ(p[0], 0.3 * 0.4);
  EXPECT_DOUBLE_EQ(p[3], 0.7 * 0.6);
  EXPECT_NEAR(event_probability(m, theta, AtomEvent::all(4)), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(event_probability(m, theta, AtomEvent({0, 2}, 4)), 0.3 * 0.4 + 0.7 * 0.4);
  EXPECT_TRUE(validate(m, theta).empty());
}

TEST(MonomialModel, HigherExponentsAreNotMultilinear) {
  auto part = partition({{0, 1}});
  MonomialModel m(ExponentMatrix(2, 2, {{0, 0, 2}, {1, 1, 1}}), part);
  EXPECT_FALSE(check_multilinear(m));
  EXPECT_EQ(code_of([&] { check_regular(m, Regularity::Weak); }), ErrorCode::NonMultilinear);
}

TEST(MonomialModel, RegularityModes) {
  const MonomialModel coins = two_coins();
  EXPECT_TRUE(check_regular(coins, Regularity::Weak));
  EXPECT_TRUE(check_regular(coins, Regularity::Strict));

  // A staged-tree shape: the second block is only used below one branch.
  auto part = partition({{0, 1}, {2, 3}});
  MonomialModel tree(ExponentMatrix(3, 4, {{0, 0, 1}, {0, 2, 1}, {1, 0, 1}, {1, 3, 1}, {2, 1, 1}}),
                     part);
  EXPECT_TRUE(check_regular(tree, Regularity::Weak));
  EXPECT_FALSE(check_regular(tree, Regularity::Strict));

  // Two parameters of one block in one row.
  MonomialModel clash(ExponentMatrix(2, 3, {{0, 2, 1}, {1, 0, 1}, {1, 1, 1}}), partition({{0, 1, 2}}));
  EXPECT_FALSE(check_regular(clash, Regularity::Weak));
}

TEST(MonomialModel, StrictRegularityGroupsBlocksIntoFamilies) {
  const CompiledModel bn = mmsa::testing::reference_bn();
  EXPECT_FALSE(check_regular(bn.model, Regularity::Strict));
  EXPECT_TRUE(check_regular(bn.model, Regularity::Strict, bn.block_owner));
  EXPECT_TRUE(check_regular(bn, Regularity::Strict));
  std::vector<Index> wrong(2, 0);
  EXPECT_EQ(code_of([&] { check_regular(bn.model, Regularity::Strict, wrong); }),
            ErrorCode::ShapeMismatch);
}

TEST(Validate, FlagsPositivityAndBlockSums) {
  const MonomialModel m = two_coins();
  ParameterVector theta(m.partition_ptr(), {0.3, 0.6, 0.4, 0.6});
  const auto report = validate(m, theta);
  ASSERT_FALSE(report.empty());
  bool saw_sum = false;
  for (const auto& v : report) saw_sum |= v.kind == Violation::Kind::SumToOne;
  EXPECT_TRUE(saw_sum);

  ParameterVector zero(m.partition_ptr(), {0.0, 1.0, 0.4, 0.6});
  bool saw_pos = false;
  for (const auto& v : validate(m, zero)) saw_pos |= v.kind == Violation::Kind::Positivity;
  EXPECT_TRUE(saw_pos);

  ParameterVector short_theta(partition({{0, 1}}), {0.5, 0.5});
  ASSERT_EQ(validate(m, short_theta).size(), 1u);
  EXPECT_EQ(validate(m, short_theta)[0].kind, Violation::Kind::ShapeMismatch);
}

TEST(Validate, DetectsTotalMassDefect) {
  // Blocks sum to one but atoms do not cover the product: only three of
  // the four coin outcomes are atoms.
  auto part = partition({{0, 1}, {2, 3}});
  MonomialModel m(ExponentMatrix(3, 4, {{0, 0, 1}, {0, 2, 1}, {1, 0, 1}, {1, 3, 1}, {2, 1, 1}, {2, 2, 1}}),
                  part);
  ParameterVector theta(part, {0.5, 0.5, 0.5, 0.5});
  bool saw_norm = false;
  for (const auto& v : validate(m, theta)) saw_norm |= v.kind == Violation::Kind::Normalization;
  EXPECT_TRUE(saw_norm);
}

TEST(AtomEvent, RejectsEmptyDuplicateAndOutOfRange) {
  EXPECT_EQ(code_of([] { AtomEvent({}, 3); }), ErrorCode::EmptyEvent);
  EXPECT_EQ(code_of([] { AtomEvent({1, 1}, 3); }), ErrorCode::EmptyEvent);
  EXPECT_EQ(code_of([] { AtomEvent({3}, 3); }), ErrorCode::IndexOutOfRange);
  AtomEvent e({2, 0}, 3);
  EXPECT_TRUE(e.contains(0));
  EXPECT_FALSE(e.contains(1));
  EXPECT_EQ(e.atoms()[0], 0u);
}

TEST(Evaluation, RejectsInvalidTheta) {
  const MonomialModel m = two_coins();
  ParameterVector bad(m.partition_ptr(), {0.3, 0.6, 0.4, 0.6});
  EXPECT_EQ(code_of([&] { atomic_probabilities(m, bad); }), ErrorCode::SimplexViolation);
  ParameterVector wrong(partition({{0, 1}}), {0.5, 0.5});
  EXPECT_EQ(code_of([&] { atomic_probability(m, wrong, 0); }), ErrorCode::ShapeMismatch);
}
