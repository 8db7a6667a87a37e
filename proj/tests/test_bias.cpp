#include "support.hpp"

#include <gtest/gtest.h>

using namespace biaslab;

namespace {

void expect_matrix_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) EXPECT_NEAR(a(i, j), b(i, j), tol) << i << "," << j;
  }
}

void expect_rows_stochastic(const ListeningNetwork& net) {
  for (Eigen::Index i = 0; i < net.weights().rows(); ++i) {
    EXPECT_NEAR(net.weights().row(i).sum(), 1.0, 1e-12);
  }
}

}  // namespace

TEST(CoreBias, ThreeAgentCutsTheMutualLink) {
  const auto t_star = apply_core_bias(fixtures::three_agent_network(), fixtures::three_agent_beliefs(), 0.3);
  Matrix expected(3, 3);
  expected << 0.95, 0, 0.05, 0, 0.95, 0.05, 0.05, 0.05, 0.9;
  expect_matrix_near(t_star.weights(), expected, 1e-15);
}

TEST(CoreBias, ZeroStrengthLeavesNetworkUnchanged) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const auto net = fixtures::random_general(6, rng);
    const auto x0 = fixtures::random_beliefs(6, rng);
    EXPECT_TRUE(apply_core_bias(net, x0, 0.0) == net);
  }
}

TEST(CoreBias, VotingExampleGivesBandedNetwork) {
  const auto t_star = apply_core_bias(fixtures::voting_network(), fixtures::voting_beliefs(), 0.78);
  expect_matrix_near(t_star.weights(), fixtures::voting_biased_weights(), 1e-15);
}

TEST(CoreBias, ThresholdIsStrict) {
  // Gap exactly 0.5 with q = 0.5 keeps the link; a hair more cuts it.
  const auto net = build_network({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_TRUE(apply_core_bias(net, make_beliefs({0.25, 0.75}), 0.5) == net);
  EXPECT_EQ(apply_core_bias(net, make_beliefs({0.25, 0.7500001}), 0.5)(0, 1), 0.0);
}

TEST(CoreBias, DimensionMismatchThrows) {
  EXPECT_THROW(apply_core_bias(fixtures::three_agent_network(), make_beliefs({0.1, 0.2}), 0.3), Error);
}

TEST(PhiBias, ThreeAgentVariants) {
  const auto net = fixtures::three_agent_network();
  const auto x0 = fixtures::three_agent_beliefs();
  Matrix phi0(3, 3);
  phi0 << 0.55, 0, 0.45, 0, 0.55, 0.45, 0.05, 0.05, 0.9;
  expect_matrix_near(apply_phi_bias(net, x0, 0.3, 0.0).weights(), phi0, 1e-15);
  Matrix phi65(3, 3);
  phi65 << 0.81, 0, 0.19, 0, 0.81, 0.19, 0.05, 0.05, 0.9;
  expect_matrix_near(apply_phi_bias(net, x0, 0.3, 0.65).weights(), phi65, 1e-15);
}

TEST(PhiBias, PhiOneMatchesCore) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const auto net = fixtures::random_general(7, rng);
    const auto x0 = fixtures::random_beliefs(7, rng);
    const double q = u(rng);
    expect_matrix_near(apply_phi_bias(net, x0, q, 1.0).weights(), apply_core_bias(net, x0, q).weights(), 1e-15);
  }
}

TEST(PhiBias, NoSurvivorsSendsEverythingToSelf) {
  const auto net = build_network({{0.0, 1.0}, {1.0, 0.0}});
  const auto out = apply_phi_bias(net, make_beliefs({0.0, 1.0}), 0.5, 0.0);
  EXPECT_TRUE(out.weights().isApprox(Matrix::Identity(2, 2)));
}

TEST(PhiBias, ZeroWeightSurvivorGetsNothing) {
  // Agent 0 cuts agent 1; agent 2 is a survivor with zero weight and gets no share.
  const auto net = build_network({{0.5, 0.3, 0.0, 0.2}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
  const auto out = apply_phi_bias(net, make_beliefs({0.0, 0.9, 0.1, 0.2}), 0.5, 0.0);
  EXPECT_EQ(out(0, 2), 0.0);
  EXPECT_NEAR(out(0, 3), 0.5, 1e-15);
  EXPECT_NEAR(out(0, 0), 0.5, 1e-15);
}

TEST(GeneralizedBias, FullAlphaOnceMatchesCore) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const auto net = fixtures::random_general(6, rng);
    const auto x0 = fixtures::random_beliefs(6, rng);
    const double q = u(rng);
    const auto spec = BiasSpec::generalized({q}, 1.0, false);
    expect_matrix_near(apply_generalized_bias(net, x0, spec).weights(), apply_core_bias(net, x0, q).weights(), 1e-15);
  }
}

TEST(GeneralizedBias, ZeroAlphaIsIdentity) {
  std::mt19937_64 rng(4);
  const auto net = fixtures::random_general(6, rng);
  const auto x0 = fixtures::random_beliefs(6, rng);
  const auto spec = BiasSpec::generalized({0.9}, 0.0, true);
  EXPECT_TRUE(apply_generalized_bias(net, x0, spec).weights().isApprox(net.weights(), 0.0));
}

TEST(GeneralizedBias, WeightsOnlyMoveTowardTheDiagonal) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int draw = 0; draw < 100; ++draw) {
    ListeningNetwork net = fixtures::random_symmetric(6, rng, 0.0);
    std::vector<double> q(6);
    for (double& v : q) v = u(rng);
    const auto spec = BiasSpec::generalized(q, 0.5, true);
    BeliefState x = fixtures::random_beliefs(6, rng);
    for (int period = 0; period < 3; ++period) {
      const auto next = apply_generalized_bias(net, x, spec);
      expect_rows_stochastic(next);
      for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
          if (i == j) {
            EXPECT_GE(next(i, j), net(i, j) - 1e-15);
          } else {
            EXPECT_LE(next(i, j), net(i, j) + 1e-15);
          }
        }
      }
      x = step(next, x);
      net = next;
    }
  }
}

TEST(GeneralizedBias, UsesPerAgentThresholdAndCurrentBeliefs) {
  const auto net = build_network({{0.5, 0.5}, {0.5, 0.5}});
  // Gap 0.6: agent 0 (q = 0.5, threshold 0.5) cuts, agent 1 (q = 0.3, threshold 0.7) keeps.
  const auto spec = BiasSpec::generalized({0.5, 0.3}, 1.0, true);
  const auto out = apply_generalized_bias(net, make_beliefs({0.2, 0.8}, 4), spec);
  EXPECT_EQ(out(0, 1), 0.0);
  EXPECT_EQ(out(1, 0), 0.5);
}

TEST(GeneralizedBias, RejectsOtherModes) {
  EXPECT_THROW(apply_generalized_bias(fixtures::three_agent_network(), fixtures::three_agent_beliefs(), BiasSpec::core(0.3)), Error);
}

TEST(CoreBias, Properties) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const auto net = fixtures::random_symmetric(8, rng, 0.0);
    const auto x0 = fixtures::random_beliefs(8, rng);
    double q1 = u(rng), q2 = u(rng);
    if (q1 > q2) std::swap(q1, q2);
    const auto a = apply_core_bias(net, x0, q1);
    const auto b = apply_core_bias(net, x0, q2);
    expect_rows_stochastic(b);
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_GE(b(i, i), net(i, i));
      for (std::size_t j = 0; j < 8; ++j) {
        // Monotone in q: anything cut at q1 is also cut at q2.
        if (i != j && net(i, j) > 0 && a(i, j) == 0) EXPECT_EQ(b(i, j), 0.0);
      }
    }
    // Symmetric input stays symmetric, and the transform is idempotent.
    EXPECT_TRUE(b.is_symmetric());
    EXPECT_TRUE(apply_core_bias(b, x0, q2) == b);
  }
}

TEST(BiasSpec, CoreModeRestrictions) {
  BiasSpec s = BiasSpec::core(0.3);
  s.phi = 0.5;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_THROW(BiasSpec::core(1.5), Error);
  EXPECT_THROW(BiasSpec::phi_extension(0.3, -0.1), Error);
}
