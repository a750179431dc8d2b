#include <gtest/gtest.h>

#include <cmath>

#include "setfusion/error.hpp"
#include "setfusion/gating.hpp"
#include "setfusion/metric_learning.hpp"
#include "test_support.hpp"

using namespace setfusion;
using setfusion::testing::max_abs;

namespace {

struct Instance {
  KernelBank bank;
  std::vector<int> labels;
  GatingParams params;
  Matrix transform;
};

Instance random_instance(std::size_t n, Index dw, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance inst;
  const auto gallery = setfusion::testing::random_gallery(n, 4, 2, 3, rng, &inst.labels);
  const auto ids = setfusion::testing::all_kernel_ids();
  inst.bank = build_kernel_bank(gallery, ids, true);
  inst.params = setfusion::testing::random_params(3, static_cast<Index>(n), 0.2, rng);
  inst.transform = setfusion::testing::random_orthonormal(static_cast<Index>(n), dw, rng);
  return inst;
}

KernelBank identical_bank(std::size_t copies, const Matrix& gram) {
  KernelBank bank;
  for (std::size_t q = 0; q < copies; ++q) bank.kernels.push_back(KernelMatrix{kAllKernels[q], gram, 1.0, false});
  return bank;
}

}  // namespace

TEST(GatingWeights, UniformAtZero) {
  const Instance inst = random_instance(6, 2, 1);
  GatingParams p = inst.params;
  for (Vector& d : p.deltas) d.setZero();
  p.rhos.setConstant(0.3);
  const GatingWeights w = gating_weights(inst.bank, p);
  EXPECT_LT(max_abs(w.xi - Matrix::Constant(3, 6, 1.0 / 3.0)), 1e-15);
}

TEST(GatingWeights, SingleKernelIsExactlyOne) {
  const Instance inst = random_instance(5, 2, 2);
  KernelBank one;
  one.kernels.push_back(inst.bank.kernels.front());
  GatingParams p;
  p.deltas.push_back(inst.params.deltas.front());
  p.rhos = Vector::Constant(1, 4.0);
  EXPECT_EQ(gating_weights(one, p).xi, Matrix::Ones(1, 5));
}

TEST(GatingWeights, DominantRhoSaturates) {
  const Instance inst = random_instance(5, 2, 3);
  GatingParams p = inst.params;
  for (Vector& d : p.deltas) d.setZero();
  p.rhos << 50.0, 0.0, 0.0;
  const GatingWeights w = gating_weights(inst.bank, p);
  for (Index i = 0; i < 5; ++i) EXPECT_GE(w(0, i), 1.0 - 1e-20);
}

TEST(GatingWeights, PositiveNormalizedAndShiftInvariant) {
  const Instance inst = random_instance(9, 2, 4);
  const GatingWeights w = gating_weights(inst.bank, inst.params);
  EXPECT_LT((w.xi.colwise().sum().transpose() - Vector::Ones(9)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(w.xi.minCoeff(), 0.0);
  GatingParams shifted = inst.params;
  shifted.rhos.array() += 7.5;
  EXPECT_LT(max_abs(gating_weights(inst.bank, shifted).xi - w.xi), 1e-14);
}

TEST(GatingWeights, HugeScoresDoNotOverflow) {
  const Instance inst = random_instance(4, 2, 5);
  GatingParams p = inst.params;
  for (Vector& d : p.deltas) d.setZero();
  p.rhos << 700.0, 699.0, 800.0;
  const GatingWeights w = gating_weights(inst.bank, p);
  EXPECT_TRUE(w.xi.allFinite());
  EXPECT_NEAR(w(2, 0), 1.0, 1e-15);
}

TEST(GatingWeights, ProbeGateMatchesTrainingColumn) {
  const Instance inst = random_instance(7, 2, 6);
  const GatingWeights w = gating_weights(inst.bank, inst.params);
  std::vector<Vector> cols;
  for (std::size_t q = 0; q < 3; ++q) cols.push_back(inst.bank.gram(q).col(3));
  EXPECT_LT((gating_weights_for(cols, inst.params) - w.xi.col(3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GatingGradients, MatchFiniteDifferences) {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const Instance inst = random_instance(12, 3, seed);
    const GatingGradients g = gating_gradients(inst.bank, inst.params, inst.transform, inst.labels);
    const GatingGradients fd =
        setfusion::testing::finite_difference_gradient(inst.bank, inst.params, inst.transform, inst.labels, 1e-5);
    EXPECT_LE(setfusion::testing::worst_gradient_error(g, fd), 1e-4) << "seed " << seed;
  }
}

TEST(GatingGradients, IdenticalKernelsGiveEqualGradients) {
  const Instance inst = random_instance(8, 2, 20);
  const KernelBank bank = identical_bank(3, inst.bank.gram(0));
  GatingParams p = inst.params;
  for (Vector& d : p.deltas) d.setZero();
  p.rhos.setZero();
  const GatingGradients g = gating_gradients(bank, p, inst.transform, inst.labels);
  EXPECT_LT((g.deltas[0] - g.deltas[1]).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((g.deltas[0] - g.deltas[2]).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GatingGradients, SingleKernelGradientIsZero) {
  const Instance inst = random_instance(8, 2, 21);
  const KernelBank bank = identical_bank(1, inst.bank.gram(1));
  GatingParams p;
  p.deltas.push_back(inst.params.deltas[0]);
  p.rhos = Vector::Constant(1, 0.1);
  const GatingGradients g = gating_gradients(bank, p, inst.transform, inst.labels);
  EXPECT_EQ(g.deltas[0], Vector::Zero(8));
  EXPECT_EQ(g.rhos(0), 0.0);
}

TEST(GatingStep, NoOpCasesAndUpdate) {
  const Instance inst = random_instance(6, 2, 30);
  GatingGradients zero;
  for (std::size_t q = 0; q < 3; ++q) zero.deltas.push_back(Vector::Zero(6));
  zero.rhos = Vector::Zero(3);
  const GatingParams same = gating_step(inst.params, zero, 1e-4);
  EXPECT_EQ(same.rhos, inst.params.rhos);
  EXPECT_EQ(same.deltas[1], inst.params.deltas[1]);

  const GatingGradients g = gating_gradients(inst.bank, inst.params, inst.transform, inst.labels);
  const GatingParams frozen = gating_step(inst.params, g, 0.0);
  EXPECT_EQ(frozen.deltas[2], inst.params.deltas[2]);
  const GatingParams moved = gating_step(inst.params, g, 0.5);
  EXPECT_LT((moved.deltas[0] - (inst.params.deltas[0] + 0.5 * g.deltas[0])).cwiseAbs().maxCoeff(), 1e-15);

  GatingGradients bad = g;
  bad.rhos(1) = std::nan("");
  try {
    gating_step(inst.params, bad, 1e-4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteGradient);
  }
}

TEST(GatingStep, SmallStepDoesNotDecreaseObjective) {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    const Instance inst = random_instance(10, 2, seed);
    const double before = setfusion::testing::objective_through_scatter(inst.bank, inst.params, inst.transform,
                                                                        inst.labels);
    const GatingGradients g = gating_gradients(inst.bank, inst.params, inst.transform, inst.labels);
    double gamma = 1e-4;
    double after = -1.0;
    for (int attempt = 0; attempt < 4 && after < before; ++attempt, gamma /= 10.0) {
      after = setfusion::testing::objective_through_scatter(inst.bank, gating_step(inst.params, g, gamma),
                                                            inst.transform, inst.labels);
    }
    EXPECT_GE(after, before - 1e-14);
  }
}

TEST(ProjectedObjective, AgreesWithScatterObjective) {
  const Instance inst = random_instance(9, 3, 50);
  const GatingWeights w = gating_weights(inst.bank, inst.params);
  const double direct = projected_objective(inst.bank, w, inst.transform, inst.labels).value();
  EXPECT_NEAR(direct, objective_value(inst.transform, scatter_matrices(inst.bank, inst.labels, w)), 1e-12);
}
