#ifndef BIASLAB_LEARN_HPP
#define BIASLAB_LEARN_HPP

#include "biaslab/bias.hpp"
#include "biaslab/network_io.hpp"
#include "biaslab/spectral.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace biaslab {

inline constexpr std::int64_t default_t_max = 100'000;

/// Belief path of one run. `networks` holds a single matrix for static runs and one matrix
/// per period when the bias is re-applied every period (networks[t] maps states[t] to
/// states[t + 1]).
struct Trajectory {
  std::vector<BeliefState> states;
  std::vector<ListeningNetwork> networks;
  std::optional<double> consensus_value;
  std::optional<std::int64_t> belief_convergence_time;

  const ListeningNetwork& network_at(std::size_t t) const {
    return networks.size() == 1 ? networks.front() : networks.at(t);
  }
};

inline double belief_spread(const Vector& x) {
  return x.size() == 0 ? 0.0 : x.maxCoeff() - x.minCoeff();
}

/// One DeGroot update x_{t+1} = T x_t.
inline BeliefState step(const ListeningNetwork& net, const BeliefState& x) {
  require_same_size(net, x, "step");
  Vector next = net.weights() * x.beliefs;
  // Convex combinations stay in [0,1]; clamp away last-bit rounding.
  next = next.cwiseMax(0.0).cwiseMin(1.0);
  return BeliefState{x.t + 1, std::move(next)};
}

/// Consensus value s . x0, where s is the influence vector.
inline double consensus(const ListeningNetwork& net, const BeliefState& x0) {
  require_same_size(net, x0, "consensus");
  const Vector s = influence_power(net);
  return s.dot(x0.beliefs);
}

namespace detail {

inline Trajectory iterate(const ListeningNetwork& net, const BeliefState& x0,
                          const std::optional<BiasSpec>& spec, double eps, std::int64_t t_max,
                          bool stop_at_convergence) {
  require_same_size(net, x0, "run");
  if (!(eps > 0.0)) throw Error(ErrorKind::precondition_violated, "eps must be positive");
  if (t_max < 1) throw Error(ErrorKind::precondition_violated, "t_max must be at least 1");

  const bool per_period = spec && spec->mode == BiasMode::generalized && spec->per_period;
  Trajectory traj;
  BeliefState x = x0;
  x.t = 0;
  traj.states.push_back(x);

  std::optional<ListeningNetwork> current;
  if (per_period) {
    current = net;
  } else {
    current = spec ? apply_bias(net, x0, *spec) : net;
    traj.networks.push_back(*current);
  }
  for (std::int64_t t = 0;; ++t) {
    if (!traj.belief_convergence_time && belief_spread(x.beliefs) < eps) {
      traj.belief_convergence_time = t;
      if (stop_at_convergence) break;
    }
    if (t == t_max) break;
    if (per_period) {
      current = apply_generalized_bias(*current, x, *spec);
      traj.networks.push_back(*current);
    }
    x = step(*current, x);
    traj.states.push_back(x);
  }
  if (per_period) {
    if (traj.networks.empty()) traj.networks.push_back(net);
  } else if (current->is_ergodic()) {
    traj.consensus_value = consensus(*current, x0);
  }
  return traj;
}

}  // namespace detail

/// Runs the learning process until the belief spread max_i x_it - min_i x_it drops below eps
/// or t_max periods have elapsed. A bias spec is applied once at t = 0, or before every step
/// when it is a per-period generalized spec.
inline Trajectory run(const ListeningNetwork& net, const BeliefState& x0,
                      const std::optional<BiasSpec>& spec, double eps,
                      std::int64_t t_max = default_t_max) {
  return detail::iterate(net, x0, spec, eps, t_max, true);
}

/// Like run(), but always records every period up to `horizon`; the convergence time is still
/// the first period with spread below eps.
inline Trajectory run_through(const ListeningNetwork& net, const BeliefState& x0,
                              const std::optional<BiasSpec>& spec, double eps,
                              std::int64_t horizon) {
  return detail::iterate(net, x0, spec, eps, horizon, false);
}

/// Spread of the limiting beliefs, max minus min over the consensus values of the closed
/// classes of `net`. The spread is weakly decreasing along any trajectory and tends to this
/// value, so when it is at least eps the spread never drops below eps. Absent when some closed
/// class is periodic (its beliefs need not settle).
inline std::optional<double> limiting_spread(const ListeningNetwork& net, const BeliefState& x0) {
  require_same_size(net, x0, "limiting_spread");
  if (net.is_ergodic()) return 0.0;
  const auto comps = strongly_connected_components(net);
  std::vector<int> comp_of(net.n(), -1);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (std::size_t v : comps[c]) comp_of[v] = static_cast<int>(c);
  }
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& members = comps[c];
    bool closed = true;
    for (std::size_t v : members) {
      for (std::size_t w : net.adjacency()[v]) {
        if (comp_of[w] != static_cast<int>(c)) closed = false;
      }
    }
    if (!closed) continue;
    const auto k = static_cast<Eigen::Index>(members.size());
    Matrix sub(k, k);
    Vector xs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      xs(a) = x0[members[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < k; ++b) {
        sub(a, b) = net(members[static_cast<std::size_t>(a)], members[static_cast<std::size_t>(b)]);
      }
    }
    const ListeningNetwork block = build_network(std::move(sub));
    if (!block.is_aperiodic()) return std::nullopt;
    const double value = influence_power(block).dot(xs);
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  }
  return hi - lo;
}

/// CSV with columns t, agent_id, belief.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,agent_id,belief\n";
  for (const auto& state : traj.states) {
    for (std::size_t i = 0; i < state.n(); ++i) {
      out << state.t << ',' << i << ',' << format_real(state[i]) << '\n';
    }
  }
}

}  // namespace biaslab

#endif  // BIASLAB_LEARN_HPP
