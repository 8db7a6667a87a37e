#ifndef BIASLAB_BUILDERS_HPP
#define BIASLAB_BUILDERS_HPP

#include "biaslab/bias.hpp"
#include "biaslab/learn.hpp"
#include "biaslab/network.hpp"
#include "biaslab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace biaslab {

/// Undirected simple graph as sorted neighbour lists.
struct Graph {
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t n() const noexcept { return neighbors.size(); }
  std::size_t degree(std::size_t i) const { return neighbors[i].size(); }
  bool has_edge(std::size_t i, std::size_t j) const {
    return std::binary_search(neighbors[i].begin(), neighbors[i].end(), j);
  }

  static Graph from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    Graph g{std::vector<std::vector<std::size_t>>(n)};
    for (auto [a, b] : edges) {
      if (a == b || a >= n || b >= n) {
        throw Error(ErrorKind::precondition_violated, "edge list must describe a simple graph");
      }
      g.neighbors[a].push_back(b);
      g.neighbors[b].push_back(a);
    }
    for (auto& nb : g.neighbors) {
      std::sort(nb.begin(), nb.end());
      if (std::adjacent_find(nb.begin(), nb.end()) != nb.end()) {
        throw Error(ErrorKind::precondition_violated, "duplicate edge");
      }
    }
    return g;
  }

  bool connected() const {
    if (neighbors.empty()) return true;
    std::vector<bool> seen(n(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : neighbors[v]) {
        if (!seen[w]) {
          seen[w] = true;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == n();
  }
};

// ---------------------------------------------------------------------------
// Meeting-based random network

/// Parameters of the meeting-based growth model. Defaults are the large-society setting:
/// 1000 agents grown from a 40-node tournament by 960 entrants.
struct GeneratorParams {
  std::size_t n = 1000;
  std::size_t m0 = 40;
  std::size_t random_meetings = 20;
  double random_link_prob = 0.8;
  std::size_t neighbor_meetings = 20;
  double neighbor_link_prob = 0.8;
  std::uint64_t seed = 0;
  int max_attempts = 100;

  void validate() const {
    if (m0 == 0 || m0 > n) throw Error(ErrorKind::config_invalid, "need 1 <= m0 <= n");
    auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!unit(random_link_prob) || !unit(neighbor_link_prob)) {
      throw Error(ErrorKind::config_invalid, "link probabilities must lie in [0,1]");
    }
    if (max_attempts < 1) throw Error(ErrorKind::config_invalid, "max_attempts must be positive");
  }
};

/// Directed unweighted digraph produced by the growth process; out[i] lists whom i listens to.
struct MeetingDigraph {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::vector<std::size_t>> in;
};

namespace detail {

inline MeetingDigraph grow_meeting_digraph(const GeneratorParams& p, Engine& rng) {
  MeetingDigraph g{std::vector<std::vector<std::size_t>>(p.n), std::vector<std::vector<std::size_t>>(p.n)};
  std::bernoulli_distribution direction(0.5);
  auto link = [&](std::size_t a, std::size_t b) {
    if (direction(rng)) {
      g.out[a].push_back(b);
      g.in[b].push_back(a);
    } else {
      g.out[b].push_back(a);
      g.in[a].push_back(b);
    }
  };

  // Initial cluster: a tournament, exactly one direction per pair.
  for (std::size_t i = 0; i < p.m0; ++i) {
    for (std::size_t j = i + 1; j < p.m0; ++j) link(i, j);
  }

  std::bernoulli_distribution random_link(p.random_link_prob);
  std::bernoulli_distribution neighbor_link(p.neighbor_link_prob);
  std::vector<std::size_t> pool;
  std::vector<char> met(p.n, 0);
  for (std::size_t v = p.m0; v < p.n; ++v) {
    pool.resize(v);
    for (std::size_t u = 0; u < v; ++u) pool[u] = u;
    const auto random_met = sample_without_replacement(pool, p.random_meetings, rng);

    std::vector<std::size_t> connections;
    for (std::size_t u : random_met) {
      met[u] = 1;
      if (random_link(rng)) {
        link(v, u);
        connections.push_back(u);
      }
    }

    // Neighbour pool: union of in- and out-neighbours of the new connections, minus anyone
    // the entrant has already met.
    std::vector<std::size_t> neighbor_pool;
    for (std::size_t c : connections) {
      for (const auto* list : {&g.out[c], &g.in[c]}) {
        for (std::size_t w : *list) {
          if (w != v && !met[w]) {
            met[w] = 2;
            neighbor_pool.push_back(w);
          }
        }
      }
    }
    std::sort(neighbor_pool.begin(), neighbor_pool.end());
    for (std::size_t w : neighbor_pool) met[w] = 0;
    const auto neighbor_met = sample_without_replacement(neighbor_pool, p.neighbor_meetings, rng);
    for (std::size_t w : neighbor_met) {
      if (neighbor_link(rng)) link(v, w);
    }
    for (std::size_t u : random_met) met[u] = 0;
  }
  return g;
}

inline bool digraph_strongly_connected(const std::vector<std::vector<std::size_t>>& out) {
  int count = 0;
  tarjan_components(out, count);
  return count == 1;
}

}  // namespace detail

/// Row-uniform listening network from a digraph: each agent splits its attention equally over
/// its out-neighbours, with no self-weight.
inline ListeningNetwork row_uniform_network(const std::vector<std::vector<std::size_t>>& out) {
  const auto n = static_cast<Eigen::Index>(out.size());
  Matrix w = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& nb = out[static_cast<std::size_t>(i)];
    if (nb.empty()) throw Error(ErrorKind::bad_row, "agent " + std::to_string(i) + " listens to nobody");
    const double share = 1.0 / static_cast<double>(nb.size());
    for (std::size_t j : nb) w(i, static_cast<Eigen::Index>(j)) = share;
  }
  return build_network(std::move(w));
}

/// Meeting-based random network. Each attempt uses its own seed substream; digraphs that are
/// not strongly connected are discarded and regrown.
inline ListeningNetwork generate_meeting_network(const GeneratorParams& params,
                                                 int* attempts_used = nullptr) {
  params.validate();
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Engine rng = make_engine(params.seed, {0x6e6574ULL, static_cast<std::uint64_t>(attempt)});
    const MeetingDigraph g = detail::grow_meeting_digraph(params, rng);
    if (params.n > 1 && !detail::digraph_strongly_connected(g.out)) continue;
    if (attempts_used) *attempts_used = attempt + 1;
    if (params.n == 1) return build_network(Matrix::Ones(1, 1));
    return row_uniform_network(g.out);
  }
  throw Error(ErrorKind::generation_failed,
              std::to_string(params.max_attempts) + " attempts produced no strongly connected network");
}

// ---------------------------------------------------------------------------
// Octopus

struct OctopusNetwork {
  ListeningNetwork network;
  /// Agents at the centre (one, or the two-agent blended pair).
  std::vector<std::size_t> center;
  /// ring[i] = 0 for centre agents, k for agents k hops out.
  std::vector<int> ring;
  /// Period by which every belief equals the mean of the initial beliefs.
  int exact_consensus_period = 0;
};

/// Layered star that reaches the mean of x0 despite confirmation bias of strength q.
///
/// The centre is an agent holding the mean belief, or else the closest-belief pair (a, b)
/// with |x_a - x_b| < 1 - q whose beliefs bracket the mean, weighted so that both hit the mean
/// after one period. Every other agent listens, with weight 1, to the closest-belief agent of
/// the previous ring whose link survives the bias (gap <= 1 - q); ring k collects the agents
/// first reachable that way at hop k. Ties go to the lowest index.
inline OctopusNetwork octopus(const BeliefState& x0, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorKind::precondition_violated, "octopus needs q in (0,1]");
  const std::size_t n = x0.n();
  if (n == 0) throw Error(ErrorKind::infeasible, "no agents");
  const double width = 1.0 - q;
  const double truth = x0.beliefs.mean();
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<int> ring(n, -1);
  std::vector<std::size_t> center;

  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(x0[i] - truth) <= tol::equality) {
      center = {i};
      break;
    }
  }
  int delay = 0;
  if (!center.empty()) {
    const auto a = static_cast<Eigen::Index>(center.front());
    w(a, a) = 1.0;
  } else {
    double best = std::numeric_limits<double>::infinity();
    std::optional<std::pair<std::size_t, std::size_t>> pair;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double gap = std::abs(x0[a] - x0[b]);
        const double lo = std::min(x0[a], x0[b]);
        const double hi = std::max(x0[a], x0[b]);
        if (gap < width && lo < truth && truth < hi && gap < best) {
          best = gap;
          pair = std::make_pair(a, b);
        }
      }
    }
    if (!pair) throw Error(ErrorKind::no_center_pair, "no agent or listening pair brackets the mean");
    const auto [a, b] = *pair;
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    // x_a1 = (1 - w_ab) x_a + w_ab x_b = truth, and symmetrically for b.
    const double w_ab = (x0[a] - truth) / (x0[a] - x0[b]);
    const double w_ba = (x0[b] - truth) / (x0[b] - x0[a]);
    w(ia, ia) = 1.0 - w_ab;
    w(ia, ib) = w_ab;
    w(ib, ib) = 1.0 - w_ba;
    w(ib, ia) = w_ba;
    center = {a, b};
    delay = 1;
  }
  for (std::size_t c : center) ring[c] = 0;

  std::vector<std::size_t> frontier = center;
  int depth = 0;
  std::size_t placed = center.size();
  while (placed < n) {
    ++depth;
    std::vector<std::size_t> next;
    for (std::size_t j = 0; j < n; ++j) {
      if (ring[j] >= 0) continue;
      std::optional<std::size_t> target;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i : frontier) {
        const double gap = std::abs(x0[j] - x0[i]);
        if (!severs(gap, q) && (gap < best || (gap == best && target && i < *target))) {
          best = gap;
          target = i;
        }
      }
      if (!target) continue;
      w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(*target)) = 1.0;
      next.push_back(j);
    }
    if (next.empty()) {
      throw Error(ErrorKind::infeasible, std::to_string(n - placed) +
                                             " agents cannot reach the centre through links the bias keeps");
    }
    for (std::size_t j : next) ring[j] = depth;
    placed += next.size();
    frontier = std::move(next);
  }
  const int rings = depth;
  // With an exact centre ring k holds the mean from period k; a blended pair needs one extra
  // period to reach it. A constant society is at consensus from the start.
  int period = rings + delay;
  if (belief_spread(x0.beliefs) == 0.0) period = 0;
  return OctopusNetwork{build_network(std::move(w)), std::move(center), std::move(ring), period};
}

// ---------------------------------------------------------------------------
// Regular and heuristic-weighted networks

/// Circulant graph C_n(1..d/2) with weight 1/d on each link and no self-weight.
inline ListeningNetwork circulant(std::size_t n, std::size_t d) {
  if (d < 2 || d % 2 != 0 || d > n - 1) {
    throw Error(ErrorKind::bad_degree, "circulant needs even d with 2 <= d <= n-1");
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix w = Matrix::Zero(nn, nn);
  const double share = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 1; k <= d / 2; ++k) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>((i + k) % n)) = share;
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>((i + n - k) % n)) = share;
    }
  }
  return build_network(std::move(w));
}

inline Graph circulant_graph(std::size_t n, std::size_t d) {
  if (d < 2 || d % 2 != 0 || d > n - 1) {
    throw Error(ErrorKind::bad_degree, "circulant needs even d with 2 <= d <= n-1");
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 1; k <= d / 2; ++k) {
      const std::size_t j = (i + k) % n;
      edges.emplace_back(i, j);
    }
  }
  return Graph::from_edges(n, edges);
}

inline void require_edges(const Graph& g) {
  for (const auto& nb : g.neighbors) {
    if (!nb.empty()) return;
  }
  throw Error(ErrorKind::empty_graph, "graph has no edges");
}

/// Maximum-degree weights: 1/d_max on every edge, the remainder on the self-loop.
inline ListeningNetwork max_degree_weights(const Graph& g) {
  require_edges(g);
  std::size_t d_max = 0;
  for (std::size_t i = 0; i < g.n(); ++i) d_max = std::max(d_max, g.degree(i));
  const auto n = static_cast<Eigen::Index>(g.n());
  Matrix w = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < g.n(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j : g.neighbors[i]) w(ii, static_cast<Eigen::Index>(j)) = 1.0 / static_cast<double>(d_max);
    w(ii, ii) = 1.0 - static_cast<double>(g.degree(i)) / static_cast<double>(d_max);
  }
  return build_network(std::move(w));
}

/// Metropolis-Hastings weights: min(1/d_i, 1/d_j) on each edge, the remainder on the
/// self-loop (which equals sum_k max(0, 1/d_i - 1/d_k) over i's edges).
inline ListeningNetwork metropolis_hastings_weights(const Graph& g) {
  require_edges(g);
  const auto n = static_cast<Eigen::Index>(g.n());
  Matrix w = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < g.n(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double off = 0.0;
    for (std::size_t j : g.neighbors[i]) {
      const double v = std::min(1.0 / static_cast<double>(g.degree(i)), 1.0 / static_cast<double>(g.degree(j)));
      w(ii, static_cast<Eigen::Index>(j)) = v;
      off += v;
    }
    w(ii, ii) = 1.0 - off;
  }
  return build_network(std::move(w));
}

/// Every row equal to `row` (a rank-one chain), or uniform 1/n when no row is given.
inline ListeningNetwork complete_uniform(std::size_t n, const std::optional<std::vector<double>>& row = std::nullopt) {
  if (n == 0) throw Error(ErrorKind::bad_row, "n must be positive");
  const auto nn = static_cast<Eigen::Index>(n);
  if (!row) return build_network(Matrix::Constant(nn, nn, 1.0 / static_cast<double>(n)));
  if (row->size() != n) throw Error(ErrorKind::bad_row, "row length differs from n");
  double sum = 0.0;
  for (double v : *row) {
    if (!(v >= 0.0)) throw Error(ErrorKind::bad_row, "negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol::stochastic) throw Error(ErrorKind::bad_row, "row does not sum to 1");
  Matrix w(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) w(i, j) = (*row)[static_cast<std::size_t>(j)];
  }
  return build_network(std::move(w));
}

/// Complete network with a common self-weight d and the rest spread evenly over the other
/// n - 1 agents: the mean-field surrogate.
inline ListeningNetwork complete_with_diagonal(std::size_t n, double d) {
  if (n < 2) throw Error(ErrorKind::bad_row, "need at least two agents");
  if (!(d >= 0.0 && d <= 1.0)) throw Error(ErrorKind::bad_row, "diagonal outside [0,1]");
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix w = Matrix::Constant(nn, nn, (1.0 - d) / static_cast<double>(n - 1));
  w.diagonal().setConstant(d);
  return build_network(std::move(w));
}

/// Uniformly random simple d-regular graph via the pairing model with restarts.
inline Graph random_regular_graph(std::size_t n, std::size_t d, Engine& rng, int max_restarts = 10'000) {
  if (d >= n || (n * d) % 2 != 0) throw Error(ErrorKind::bad_degree, "no simple d-regular graph on n vertices");
  std::vector<std::size_t> stubs(n * d);
  for (int attempt = 0; attempt < max_restarts; ++attempt) {
    for (std::size_t k = 0; k < stubs.size(); ++k) stubs[k] = k / d;
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    bool ok = true;
    for (std::size_t k = 0; k < stubs.size() && ok; k += 2) {
      auto a = stubs[k], b = stubs[k + 1];
      if (a == b) ok = false;
      if (a > b) std::swap(a, b);
      if (ok && !seen.emplace(a, b).second) ok = false;
    }
    if (ok) return Graph::from_edges(n, {seen.begin(), seen.end()});
  }
  throw Error(ErrorKind::generation_failed, "pairing model kept producing multigraphs");
}

}  // namespace biaslab

#endif  // BIASLAB_BUILDERS_HPP
