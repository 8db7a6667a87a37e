#include "support.hpp"

#include <gtest/gtest.h>

using namespace biaslab;

namespace {

GeneratorParams small_params(std::uint64_t seed) {
  GeneratorParams p;
  p.n = 150;
  p.m0 = 10;
  p.random_meetings = 8;
  p.neighbor_meetings = 8;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(MeetingNetwork, Structure) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto net = generate_meeting_network(small_params(seed));
    ASSERT_EQ(net.n(), 150u);
    EXPECT_TRUE(net.is_strongly_connected());
    for (std::size_t i = 0; i < net.n(); ++i) {
      EXPECT_EQ(net(i, i), 0.0);
      const auto& nb = net.adjacency()[i];
      ASSERT_FALSE(nb.empty());
      for (std::size_t j : nb) {
        EXPECT_DOUBLE_EQ(net(i, j), 1.0 / static_cast<double>(nb.size()));
        // Each meeting creates a single directed link.
        EXPECT_EQ(net(j, i), 0.0);
      }
    }
  }
}

TEST(MeetingNetwork, InitialClusterIsATournament) {
  GeneratorParams p;
  p.n = 12;
  p.m0 = 12;
  p.seed = 3;
  p.max_attempts = 1000;
  const auto net = generate_meeting_network(p);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = i + 1; j < 12; ++j) EXPECT_NE(net.listens(i, j), net.listens(j, i));
  }
}

TEST(MeetingNetwork, SeedDeterminesTheNetwork) {
  const auto a = generate_meeting_network(small_params(9));
  const auto b = generate_meeting_network(small_params(9));
  const auto c = generate_meeting_network(small_params(10));
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
}

TEST(MeetingNetwork, LinkCountsMatchTheProcess) {
  // Each entrant creates about 0.8 * (8 + 8) = 12.8 links, and every link adds one to an out
  // degree and one to an in degree, so the mean of out + in sits a little under 25.6.
  const auto net = generate_meeting_network(small_params(4));
  const auto d = degrees(net, false);
  double total = 0.0;
  for (std::size_t i = 0; i < net.n(); ++i) total += d.out_degree[i];
  const double mean_links = 2.0 * total / static_cast<double>(net.n());
  EXPECT_GT(mean_links, 21.0);
  EXPECT_LT(mean_links, 26.0);
}

TEST(MeetingNetwork, BadParameters) {
  GeneratorParams p;
  p.m0 = 0;
  EXPECT_THROW(generate_meeting_network(p), Error);
  p = GeneratorParams{};
  p.random_link_prob = 1.5;
  EXPECT_THROW(generate_meeting_network(p), Error);
  // Nobody ever links, so no attempt can be strongly connected.
  p = small_params(1);
  p.m0 = 1;
  p.random_link_prob = 0.0;
  p.max_attempts = 3;
  try {
    generate_meeting_network(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::generation_failed);
  }
}

TEST(MeetingNetwork, LargeSocietyConvergesInSixToEightPeriods) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    GeneratorParams p;
    p.seed = seed;
    const auto net = generate_meeting_network(p);
    std::mt19937_64 rng(seed);
    const auto traj = run(net, fixtures::random_beliefs(net.n(), rng), std::nullopt, simulation_eps);
    ASSERT_TRUE(traj.belief_convergence_time.has_value());
    EXPECT_GE(*traj.belief_convergence_time, 6);
    EXPECT_LE(*traj.belief_convergence_time, 8);
  }
}

TEST(Octopus, ExactCentreReachesTheMean) {
  const auto x0 = make_beliefs({0.1, 0.3, 0.5, 0.7, 0.9});
  const auto oct = octopus(x0, 0.7);
  EXPECT_EQ(oct.center, (std::vector<std::size_t>{2}));
  EXPECT_EQ(oct.ring, (std::vector<int>{2, 1, 0, 1, 2}));
  EXPECT_EQ(oct.exact_consensus_period, 2);
  const auto traj = run(oct.network, x0, BiasSpec::core(0.7), 1e-12);
  EXPECT_EQ(traj.belief_convergence_time, 2);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(traj.states.back()[i], 0.5, 1e-12);
}

TEST(Octopus, BlendedPairCentre) {
  const auto x0 = make_beliefs({0.0, 0.4, 0.6, 0.2});
  const auto oct = octopus(x0, 0.5);
  EXPECT_EQ(oct.center.size(), 2u);
  Vector x = x0.beliefs;
  for (int t = 0; t < oct.exact_consensus_period; ++t) x = oct.network.weights() * x;
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(x(i), 0.3, 1e-12);
}

TEST(Octopus, PropertiesOnRandomInputs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int feasible = 0;
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 3 + rng() % 20;
    const auto x0 = fixtures::random_beliefs(n, rng);
    const double q = u(rng);
    std::optional<OctopusNetwork> oct;
    try {
      oct = octopus(x0, q);
    } catch (const Error&) {
      continue;
    }
    ++feasible;
    const auto t_star = apply_core_bias(oct->network, x0, q);
    EXPECT_TRUE(t_star == oct->network);
    EXPECT_EQ(information_loss(oct->network, t_star), 0u);
    Vector x = x0.beliefs;
    for (int t = 0; t < oct->exact_consensus_period; ++t) x = t_star.weights() * x;
    EXPECT_LT((x.array() - x0.beliefs.mean()).abs().maxCoeff(), 1e-9);
  }
  EXPECT_GT(feasible, 100);
}

TEST(Octopus, Errors) {
  EXPECT_THROW(octopus(make_beliefs({0.1, 0.9}), 0.0), Error);
  try {
    // Mean 0.5; the only bracketing pair is 0.8 apart and q = 0.5 cuts it.
    octopus(make_beliefs({0.1, 0.9}), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_center_pair);
  }
  try {
    // Centre pair (0.3, 0.4) reaches 0.2 and 0.0, but 1.0 is out of reach of everybody.
    octopus(make_beliefs({0.2, 0.3, 0.4, 0.0, 1.0}), 0.7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::infeasible);
  }
}

TEST(Circulant, Structure) {
  const auto net = circulant(12, 4);
  EXPECT_TRUE(net.is_symmetric());
  EXPECT_TRUE(net.is_strongly_connected());
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(net.adjacency()[i].size(), 4u);
    EXPECT_DOUBLE_EQ(net(i, (i + 1) % 12), 0.25);
    EXPECT_DOUBLE_EQ(net(i, (i + 10) % 12), 0.25);
  }
  const auto g = circulant_graph(12, 4);
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_FALSE(g.has_edge(0, 3));
  EXPECT_THROW(circulant(12, 3), Error);
  EXPECT_THROW(circulant(4, 4), Error);
}

TEST(Heuristics, MetropolisMatchesTheDefinition) {
  Engine rng(6);
  for (int k = 0; k < 20; ++k) {
    Graph g;
    do {
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      std::bernoulli_distribution keep(0.3);
      for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = i + 1; j < 10; ++j) {
          if (keep(rng)) edges.emplace_back(i, j);
        }
      }
      g = Graph::from_edges(10, edges);
    } while (!g.connected());
    const auto mh = metropolis_hastings_weights(g);
    EXPECT_LT((mh.weights() - oracle::metropolis_hastings_literal(g)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(mh.is_symmetric());
    EXPECT_TRUE(max_degree_weights(g).is_symmetric());
  }
}

TEST(Heuristics, StarWithThreeLeaves) {
  const auto g = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  Matrix expected(4, 4);
  expected << 0, 1.0 / 3, 1.0 / 3, 1.0 / 3,
              1.0 / 3, 2.0 / 3, 0, 0,
              1.0 / 3, 0, 2.0 / 3, 0,
              1.0 / 3, 0, 0, 2.0 / 3;
  EXPECT_LT((metropolis_hastings_weights(g).weights() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((max_degree_weights(g).weights() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Heuristics, Errors) {
  EXPECT_THROW(metropolis_hastings_weights(Graph{std::vector<std::vector<std::size_t>>(3)}), Error);
  EXPECT_THROW(Graph::from_edges(3, {{0, 0}}), Error);
  EXPECT_THROW(Graph::from_edges(3, {{0, 1}, {1, 0}}), Error);
}

TEST(CompleteNetworks, UniformAndGivenRow) {
  const auto u = complete_uniform(4);
  EXPECT_DOUBLE_EQ(u(2, 3), 0.25);
  const auto r = complete_uniform(3, std::vector<double>{0.2, 0.3, 0.5});
  EXPECT_DOUBLE_EQ(r(1, 2), 0.5);
  EXPECT_THROW(complete_uniform(3, std::vector<double>{0.2, 0.3}), Error);
  EXPECT_THROW(complete_uniform(3, std::vector<double>{0.2, 0.3, 0.6}), Error);
  const auto d = complete_with_diagonal(5, 0.6);
  EXPECT_DOUBLE_EQ(d(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(d(0, 1), 0.1);
  EXPECT_THROW(complete_with_diagonal(1, 0.5), Error);
}

TEST(RandomRegular, SimpleAndRegular) {
  Engine rng(7);
  for (int k = 0; k < 20; ++k) {
    const auto g = random_regular_graph(12, 4, rng);
    for (std::size_t i = 0; i < 12; ++i) {
      EXPECT_EQ(g.degree(i), 4u);
      EXPECT_FALSE(g.has_edge(i, i));
    }
  }
  EXPECT_THROW(random_regular_graph(5, 3, rng), Error);
}
