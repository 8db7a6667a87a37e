#ifndef BIASLAB_METRICS_HPP
#define BIASLAB_METRICS_HPP

#include "biaslab/bias.hpp"
#include "biaslab/learn.hpp"
#include "biaslab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

namespace biaslab {

// ---------------------------------------------------------------------------
// Polarization and the mean-field closed form

/// Cross-sectional variance of beliefs around the current mean.
inline double polarization(const Vector& x) {
  if (x.size() == 0) return 0.0;
  const double mu = x.mean();
  return (x.array() - mu).square().mean();
}
inline double polarization(const BeliefState& x) { return polarization(x.beliefs); }

enum class MeanFieldForm {
  /// Retention equals the self-weight T_ii (the large-population closed form).
  asymptotic,
  /// Retention T_ii - (1 - T_ii)/(n - 1): agent i's self-weight net of the share it would get
  /// as one member of a uniformly mixed population. On a complete network with a common
  /// diagonal and uniform off-diagonal weights this reproduces the dynamics exactly.
  finite_population,
};

/// Mean-field prediction x_it = (1 - r_i^t) mu + r_i^t x_i0, with mu the mean of x0 and r_i the
/// retention of agent i (see MeanFieldForm).
inline BeliefState mean_field_predict(const ListeningNetwork& net, const BeliefState& x0,
                                      std::int64_t t,
                                      MeanFieldForm form = MeanFieldForm::asymptotic) {
  require_same_size(net, x0, "mean_field_predict");
  if (t < 0) throw Error(ErrorKind::precondition_violated, "t must be non-negative");
  const auto n = static_cast<Eigen::Index>(net.n());
  const double mu = x0.beliefs.mean();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = net.weights()(i, i);
    if (form == MeanFieldForm::finite_population && n > 1) {
      r -= (1.0 - r) / static_cast<double>(n - 1);
    }
    const double rt = std::pow(r, static_cast<double>(t));
    out(i) = (1.0 - rt) * mu + rt * x0.beliefs(i);
  }
  return BeliefState{static_cast<int>(t), std::move(out)};
}

// ---------------------------------------------------------------------------
// Influencers, listeners, wisdom

enum class Role { neither, influencer, listener };

/// Labels every agent by how confirmation bias changed its degrees and its neighbourhood's
/// degrees (self-loops excluded). `t_star` must be derived from `t`: its positive off-diagonal
/// entries are a subset of those of `t`.
inline std::vector<Role> classify_roles(const ListeningNetwork& t, const ListeningNetwork& t_star) {
  if (t.n() != t_star.n()) throw Error(ErrorKind::shape_mismatch, "networks differ in size");
  const std::size_t n = t.n();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : t_star.adjacency()[i]) {
      if (i != j && !t.listens(i, j)) {
        throw Error(ErrorKind::precondition_violated, "T* has a link absent from T");
      }
    }
  }
  const DegreeProfile before = degrees(t, false);
  const DegreeProfile after = degrees(t_star, false);
  auto cut_out_kept_in = [&](std::size_t k) {
    return after.out_degree[k] < before.out_degree[k] && after.in_degree[k] == before.in_degree[k];
  };
  auto kept_out_cut_in = [&](std::size_t k) {
    return after.out_degree[k] == before.out_degree[k] && after.in_degree[k] < before.in_degree[k];
  };

  std::vector<Role> roles(n, Role::neither);
  for (std::size_t i = 0; i < n; ++i) {
    if (cut_out_kept_in(i)) {
      bool all = true;
      for (std::size_t j : t_star.adjacency()[i]) {
        if (j != i && !cut_out_kept_in(j)) {
          all = false;
          break;
        }
      }
      if (all) roles[i] = Role::influencer;
    } else if (kept_out_cut_in(i)) {
      bool all = true;
      for (std::size_t j = 0; j < n && all; ++j) {
        if (j != i && t_star.listens(j, i) && !kept_out_cut_in(j)) all = false;
      }
      if (all) roles[i] = Role::listener;
    }
  }
  return roles;
}

/// n * max_i s_i; 1 for perfectly equal influence.
inline double wisdom_index(const SpectralSummary& summary) {
  if (summary.influence.empty()) return 0.0;
  return static_cast<double>(summary.influence.size()) *
         *std::max_element(summary.influence.begin(), summary.influence.end());
}

// ---------------------------------------------------------------------------
// Information loss

/// The giant component of a network: its largest closed strongly connected component (no
/// positive link leaves it). Equal sizes go to the component holding the smallest index.
inline std::vector<std::size_t> giant_component(const ListeningNetwork& net) {
  const auto parts = strongly_connected_components(net);
  std::vector<int> comp(net.n(), -1);
  for (std::size_t c = 0; c < parts.size(); ++c) {
    for (std::size_t v : parts[c]) comp[v] = static_cast<int>(c);
  }
  for (std::size_t c = 0; c < parts.size(); ++c) {
    bool closed = true;
    for (std::size_t v : parts[c]) {
      for (std::size_t w : net.adjacency()[v]) {
        if (comp[w] != static_cast<int>(c)) {
          closed = false;
          break;
        }
      }
      if (!closed) break;
    }
    if (closed) return parts[c];
  }
  return {};
}

/// Number of agents who influence the giant component of t but not that of t_star. When t is
/// strongly connected this is n minus the size of the giant component of t_star.
inline std::size_t information_loss(const ListeningNetwork& t, const ListeningNetwork& t_star) {
  if (t.n() != t_star.n()) throw Error(ErrorKind::shape_mismatch, "networks differ in size");
  const auto before = giant_component(t);
  const auto after = giant_component(t_star);
  std::vector<bool> kept(t.n(), false);
  for (std::size_t i : after) kept[i] = true;
  return static_cast<std::size_t>(
      std::count_if(before.begin(), before.end(), [&](std::size_t i) { return !kept[i]; }));
}

struct DisconnectionEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::int64_t trials = 0;
  std::int64_t disconnected = 0;
};

/// Draws a network (fixed families may ignore the engine).
using NetworkFamily = std::function<ListeningNetwork(std::mt19937_64&)>;

/// Monte Carlo estimate of Pr(information loss > 0) after core bias at strength q, with
/// beliefs drawn i.i.d. U[0,1] each trial.
inline DisconnectionEstimate disconnection_probability(const NetworkFamily& family, double q,
                                                       std::int64_t trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorKind::precondition_violated, "trials must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DisconnectionEstimate est;
  est.trials = trials;
  for (std::int64_t k = 0; k < trials; ++k) {
    const ListeningNetwork net = family(rng);
    Vector x(static_cast<Eigen::Index>(net.n()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unif(rng);
    const ListeningNetwork biased = apply_core_bias(net, BeliefState{0, x}, q);
    if (information_loss(net, biased) > 0) ++est.disconnected;
  }
  est.probability = static_cast<double>(est.disconnected) / static_cast<double>(trials);
  est.standard_error =
      std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(trials));
  return est;
}

inline DisconnectionEstimate disconnection_probability(const ListeningNetwork& net, double q,
                                                       std::int64_t trials, std::uint64_t seed) {
  return disconnection_probability([&net](std::mt19937_64&) { return net; }, q, trials, seed);
}

// ---------------------------------------------------------------------------
// Voting

enum class Candidate { left = 0, right = 1 };

inline std::string_view to_string(Candidate c) { return c == Candidate::left ? "Left" : "Right"; }

/// How a voter sitting exactly at 0.5 votes.
enum class SwingRule {
  coin,       ///< fair coin per voter
  left,       ///< deterministic: the boundary voter counts for the Left
};

struct ElectionResult {
  Candidate winner = Candidate::left;
  int votes_left = 0;
  int votes_right = 0;
  int ties_broken = 0;       ///< voters at exactly 0.5 resolved by coin
  bool overall_tie = false;  ///< majority tied, winner drawn by coin
};

/// Sincere voting: below 0.5 votes Left, above votes Right, exactly 0.5 follows the swing rule.
/// Simple majority; an overall tie is settled by one more coin toss.
inline ElectionResult run_election(const Vector& x, std::mt19937_64& tie_rng,
                                   SwingRule swing = SwingRule::coin) {
  std::bernoulli_distribution coin(0.5);
  ElectionResult r;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    if (v < 0.5) {
      ++r.votes_left;
    } else if (v > 0.5) {
      ++r.votes_right;
    } else if (swing == SwingRule::left) {
      ++r.votes_left;
    } else {
      ++r.ties_broken;
      (coin(tie_rng) ? r.votes_right : r.votes_left) += 1;
    }
  }
  if (r.votes_left != r.votes_right) {
    r.winner = r.votes_left > r.votes_right ? Candidate::left : Candidate::right;
  } else {
    r.overall_tie = true;
    r.winner = coin(tie_rng) ? Candidate::right : Candidate::left;
  }
  return r;
}

inline ElectionResult run_election(const BeliefState& x, std::mt19937_64& tie_rng,
                                   SwingRule swing = SwingRule::coin) {
  return run_election(x.beliefs, tie_rng, swing);
}

/// Per-period election outcomes of one trajectory.
struct ElectionRecord {
  std::vector<ElectionResult> periods;
  std::vector<std::int64_t> shock_times;
  Candidate initial_winner = Candidate::left;
  Candidate limiting_winner = Candidate::left;
  /// False when the Left does not win both at t = 0 and in the limit; such scenarios are
  /// outside the shock-election definition and report no shocks.
  bool in_scope = true;
  std::uint64_t tie_seed = 0;
  SwingRule swing = SwingRule::coin;
};

/// Runs an election every period of `traj`. A shock is a period t > 0 won by the Right in a
/// society that votes Left at t = 0 and in the limit. The limiting winner comes from the
/// consensus value when known, otherwise from the last recorded state.
inline ElectionRecord detect_shock(const Trajectory& traj, std::uint64_t tie_seed,
                                   SwingRule swing = SwingRule::coin) {
  ElectionRecord rec;
  rec.tie_seed = tie_seed;
  rec.swing = swing;
  std::mt19937_64 rng(tie_seed);
  for (const auto& state : traj.states) rec.periods.push_back(run_election(state, rng, swing));
  if (rec.periods.empty()) return rec;

  rec.initial_winner = rec.periods.front().winner;
  if (traj.consensus_value && *traj.consensus_value != 0.5) {
    rec.limiting_winner = *traj.consensus_value < 0.5 ? Candidate::left : Candidate::right;
  } else {
    rec.limiting_winner = rec.periods.back().winner;
  }
  rec.in_scope = rec.initial_winner == Candidate::left && rec.limiting_winner == Candidate::left;
  if (!rec.in_scope) return rec;
  for (std::size_t t = 1; t < rec.periods.size(); ++t) {
    if (rec.periods[t].winner == Candidate::right) rec.shock_times.push_back(static_cast<std::int64_t>(t));
  }
  return rec;
}

/// CSV with columns t, votes_left, votes_right, winner, is_shock.
inline void write_election_csv(std::ostream& out, const ElectionRecord& rec) {
  out << "t,votes_left,votes_right,winner,is_shock\n";
  std::size_t next_shock = 0;
  for (std::size_t t = 0; t < rec.periods.size(); ++t) {
    const bool shock = next_shock < rec.shock_times.size() &&
                       rec.shock_times[next_shock] == static_cast<std::int64_t>(t);
    if (shock) ++next_shock;
    const auto& p = rec.periods[t];
    out << t << ',' << p.votes_left << ',' << p.votes_right << ',' << to_string(p.winner) << ','
        << (shock ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Discrete belief buckets for voting scenarios

/// Five belief positions EL < CL < S = 1/2 < CR < ER and the population share at each.
struct BeliefBuckets {
  std::array<double, 5> positions{0.0, 0.25, 0.5, 0.75, 1.0};
  std::array<double, 5> fractions{0.2, 0.2, 0.2, 0.2, 0.2};

  void validate() const {
    for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
      if (!(positions[k] < positions[k + 1])) {
        throw Error(ErrorKind::config_invalid, "bucket positions must be strictly increasing");
      }
    }
    if (positions[2] != 0.5) throw Error(ErrorKind::config_invalid, "swing position must be 0.5");
    if (positions.front() < 0.0 || positions.back() > 1.0) {
      throw Error(ErrorKind::config_invalid, "bucket positions outside [0,1]");
    }
    double sum = 0.0;
    for (double f : fractions) {
      if (!(f > 0.0 && f < 1.0)) throw Error(ErrorKind::config_invalid, "bucket fraction outside (0,1)");
      sum += f;
    }
    if (std::abs(sum - 1.0) > tol::equality) {
      throw Error(ErrorKind::config_invalid, "bucket fractions must sum to 1");
    }
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < 5; ++k) m += positions[k] * fractions[k];
    return m;
  }

  /// Left holds the majority before learning and the population mean is left of centre.
  bool left_majority() const {
    return fractions[0] + fractions[1] > fractions[3] + fractions[4] && mean() < 0.5;
  }
};

}  // namespace biaslab

#endif  // BIASLAB_METRICS_HPP
