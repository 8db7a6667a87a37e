#ifndef BIASLAB_NETWORK_HPP
#define BIASLAB_NETWORK_HPP

#include "biaslab/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace biaslab {

class ListeningNetwork;
inline ListeningNetwork build_network(Matrix weights);

/// Row-stochastic listening matrix: entry (i, j) is the weight agent i places on agent j.
///
/// Instances are only produced by build_network(), so every live value satisfies the
/// stochasticity and range invariants. Structural flags are computed once on construction.
class ListeningNetwork {
 public:
  std::size_t n() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  const Matrix& weights() const noexcept { return weights_; }
  double operator()(std::size_t i, std::size_t j) const {
    return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  bool listens(std::size_t i, std::size_t j) const { return (*this)(i, j) > 0.0; }

  bool is_symmetric() const noexcept { return symmetric_; }
  bool is_strongly_connected() const noexcept { return strongly_connected_; }
  bool is_aperiodic() const noexcept { return aperiodic_; }
  /// Strongly connected and aperiodic: the chain has a unique stationary distribution
  /// and beliefs converge to a consensus from any start.
  bool is_ergodic() const noexcept { return strongly_connected_ && aperiodic_; }

  /// Out-neighbour lists of the positive-entry digraph (self-loops included).
  const std::vector<std::vector<std::size_t>>& adjacency() const noexcept { return adjacency_; }

  friend bool operator==(const ListeningNetwork& a, const ListeningNetwork& b) {
    return a.weights_ == b.weights_;
  }

 private:
  explicit ListeningNetwork(Matrix weights);
  friend inline ListeningNetwork build_network(Matrix weights);

  Matrix weights_;
  std::vector<std::vector<std::size_t>> adjacency_;
  bool symmetric_ = false;
  bool strongly_connected_ = false;
  bool aperiodic_ = false;
};

/// Beliefs of every agent at period t. The initial state doubles as the signal endowment.
struct BeliefState {
  int t = 0;
  Vector beliefs;

  std::size_t n() const noexcept { return static_cast<std::size_t>(beliefs.size()); }
  double operator[](std::size_t i) const { return beliefs(static_cast<Eigen::Index>(i)); }
};

/// Validates that every belief lies in [0, 1]; values within 1e-12 of the bounds are clamped.
inline BeliefState make_beliefs(Vector values, int t = 0) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    double& v = values(i);
    if (!(v >= -tol::clamp && v <= 1.0 + tol::clamp)) {
      throw Error(ErrorKind::precondition_violated,
                  "belief " + std::to_string(i) + " = " + std::to_string(v) + " outside [0,1]");
    }
    v = std::clamp(v, 0.0, 1.0);
  }
  return BeliefState{t, std::move(values)};
}

inline BeliefState make_beliefs(std::span<const double> values, int t = 0) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return make_beliefs(std::move(v), t);
}

inline BeliefState make_beliefs(std::initializer_list<double> values, int t = 0) {
  return make_beliefs(std::span<const double>(values.begin(), values.size()), t);
}

struct DegreeProfile {
  std::vector<int> in_degree;
  std::vector<int> out_degree;
  bool include_self = false;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> positive_adjacency(const Matrix& w) {
  const auto n = static_cast<std::size_t>(w.rows());
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) adj[i].push_back(j);
    }
  }
  return adj;
}

/// Iterative Tarjan. Returns the component id of every vertex.
inline std::vector<int> tarjan_components(const std::vector<std::vector<std::size_t>>& adj,
                                          int& component_count) {
  const std::size_t n = adj.size();
  constexpr int unvisited = -1;
  std::vector<int> index(n, unvisited), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (vertex, next edge position)
  int counter = 0;
  component_count = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < adj[v].size()) {
        const std::size_t w = adj[v][pos++];
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w = 0;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = component_count;
        } while (w != v);
        ++component_count;
      }
      const std::size_t finished = v;
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  return comp;
}

/// gcd of cycle lengths inside one strongly connected vertex set, via BFS levels:
/// every internal edge (u, v) contributes level[u] + 1 - level[v].
inline std::size_t component_period(const std::vector<std::vector<std::size_t>>& adj,
                                    const std::vector<int>& comp, int id, std::size_t root) {
  std::vector<long> level(adj.size(), -1);
  std::queue<std::size_t> frontier;
  level[root] = 0;
  frontier.push(root);
  long g = 0;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : adj[u]) {
      if (comp[v] != id) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      } else {
        g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
      }
    }
  }
  return static_cast<std::size_t>(g);
}

}  // namespace detail

inline ListeningNetwork::ListeningNetwork(Matrix weights) : weights_(std::move(weights)) {
  const auto n = static_cast<Eigen::Index>(weights_.rows());
  adjacency_ = detail::positive_adjacency(weights_);

  symmetric_ = true;
  for (Eigen::Index i = 0; i < n && symmetric_; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(weights_(i, j) - weights_(j, i)) > tol::equality) {
        symmetric_ = false;
        break;
      }
    }
  }

  int count = 0;
  const auto comp = detail::tarjan_components(adjacency_, count);
  strongly_connected_ = (n > 0 && count == 1);

  // The digraph is aperiodic when the gcd over all cycle lengths is 1. Cycles live inside
  // strongly connected components, so the overall gcd folds the per-component periods.
  std::vector<bool> seen(static_cast<std::size_t>(count), false);
  std::size_t g = 0;
  for (std::size_t v = 0; v < adjacency_.size(); ++v) {
    const int id = comp[v];
    if (seen[static_cast<std::size_t>(id)]) continue;
    seen[static_cast<std::size_t>(id)] = true;
    g = std::gcd(g, detail::component_period(adjacency_, comp, id, v));
    if (g == 1) break;
  }
  aperiodic_ = (g == 1);
}

/// Validates a weight matrix and returns the network.
///
/// Entries in [-1e-12, 0) are clamped to zero. Rows deviating from 1 by at most 1e-9 are
/// renormalized; larger deviations are rejected.
inline ListeningNetwork build_network(Matrix weights) {
  if (weights.rows() != weights.cols()) {
    throw Error(ErrorKind::non_square, std::to_string(weights.rows()) + "x" +
                                           std::to_string(weights.cols()) + " matrix");
  }
  const Eigen::Index n = weights.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = weights(i, j);
      if (!std::isfinite(w) || w < -tol::clamp) {
        throw Error(ErrorKind::negative_weight, "entry (" + std::to_string(i) + "," +
                                                    std::to_string(j) + ") = " + std::to_string(w));
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double& w = weights(i, j);
      if (w < 0.0) w = 0.0;
      if (w > 1.0 + tol::stochastic) {
        throw Error(ErrorKind::row_sum_violation,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") exceeds 1");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > tol::stochastic) {
      throw Error(ErrorKind::row_sum_violation,
                  "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    // Rounding-level deviations are left alone so that rebuilding a network is idempotent.
    if (std::abs(sum - 1.0) > tol::renormalize) weights.row(i) /= sum;
  }
  return ListeningNetwork(std::move(weights));
}

inline ListeningNetwork build_network(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, rows.size() ? static_cast<Eigen::Index>(rows.begin()->size()) : 0);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw Error(ErrorKind::non_square, "ragged rows");
    }
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return build_network(std::move(m));
}

inline DegreeProfile degrees(const ListeningNetwork& net, bool include_self) {
  const std::size_t n = net.n();
  DegreeProfile d{std::vector<int>(n, 0), std::vector<int>(n, 0), include_self};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : net.adjacency()[i]) {
      if (i == j && !include_self) continue;
      ++d.out_degree[i];
      ++d.in_degree[j];
    }
  }
  return d;
}

/// SCC partition of the positive-entry digraph. Components are ordered by decreasing size,
/// ties broken by smallest member; members are sorted ascending.
inline std::vector<std::vector<std::size_t>> strongly_connected_components(
    const ListeningNetwork& net) {
  int count = 0;
  const auto comp = detail::tarjan_components(net.adjacency(), count);
  std::vector<std::vector<std::size_t>> parts(static_cast<std::size_t>(count));
  for (std::size_t v = 0; v < comp.size(); ++v) parts[static_cast<std::size_t>(comp[v])].push_back(v);
  std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return parts;
}

inline void require_same_size(const ListeningNetwork& net, const BeliefState& x,
                              std::string_view where) {
  require_same_size(net.n(), x.n(), where);
}

}  // namespace biaslab

#endif  // BIASLAB_NETWORK_HPP
