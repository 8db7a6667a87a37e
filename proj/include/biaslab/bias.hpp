#ifndef BIASLAB_BIAS_HPP
#define BIASLAB_BIAS_HPP

#include "biaslab/network.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace biaslab {

enum class BiasMode { core, phi_extension, generalized };

/// Confirmation-bias parameters.
///
/// core: uniform q, severed weight goes to the self-loop, applied once to initial beliefs.
/// phi_extension: as core, but only a fraction phi of severed weight goes to the self-loop.
/// generalized: per-agent q_i and per-link weakening alpha_ij, optionally re-applied every period
/// against current beliefs.
struct BiasSpec {
  BiasMode mode = BiasMode::core;
  /// One entry means uniform q; otherwise one entry per agent.
  std::vector<double> q{0.0};
  double phi = 1.0;
  /// Empty means every alpha_ij equals alpha_scalar.
  Matrix alpha;
  double alpha_scalar = 1.0;
  bool per_period = false;

  static BiasSpec core(double q) {
    BiasSpec s;
    s.q = {q};
    s.validate();
    return s;
  }
  static BiasSpec phi_extension(double q, double phi) {
    BiasSpec s;
    s.mode = BiasMode::phi_extension;
    s.q = {q};
    s.phi = phi;
    s.validate();
    return s;
  }
  static BiasSpec generalized(std::vector<double> q, double alpha, bool per_period) {
    BiasSpec s;
    s.mode = BiasMode::generalized;
    s.q = std::move(q);
    s.alpha_scalar = alpha;
    s.per_period = per_period;
    s.validate();
    return s;
  }
  static BiasSpec generalized(std::vector<double> q, Matrix alpha, bool per_period) {
    BiasSpec s;
    s.mode = BiasMode::generalized;
    s.q = std::move(q);
    s.alpha = std::move(alpha);
    s.per_period = per_period;
    s.validate();
    return s;
  }

  double q_for(std::size_t i) const { return q.size() == 1 ? q.front() : q.at(i); }
  double alpha_for(std::size_t i, std::size_t j) const {
    if (alpha.size() == 0) return alpha_scalar;
    return alpha(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (q.empty()) throw Error(ErrorKind::config_invalid, "bias q is empty");
    for (double v : q) {
      if (!unit(v)) throw Error(ErrorKind::config_invalid, "bias q outside [0,1]");
    }
    if (!unit(phi)) throw Error(ErrorKind::config_invalid, "bias phi outside [0,1]");
    if (!unit(alpha_scalar)) throw Error(ErrorKind::config_invalid, "bias alpha outside [0,1]");
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
      if (!unit(alpha.data()[k])) throw Error(ErrorKind::config_invalid, "bias alpha outside [0,1]");
    }
    if (alpha.size() != 0 && alpha.rows() != alpha.cols()) {
      throw Error(ErrorKind::config_invalid, "bias alpha matrix is not square");
    }
    if (mode == BiasMode::core) {
      if (phi != 1.0 || alpha.size() != 0 || alpha_scalar != 1.0 || per_period || q.size() != 1) {
        throw Error(ErrorKind::config_invalid,
                    "core bias requires uniform q, phi = 1, alpha = 1 and one-shot application");
      }
    }
    if (mode == BiasMode::phi_extension && q.size() != 1) {
      throw Error(ErrorKind::config_invalid, "phi extension requires uniform q");
    }
  }
};

/// True when an agent with bias q stops listening to someone whose belief differs by gap.
/// The comparison is strict: a gap of exactly 1 - q keeps the link.
inline bool severs(double gap, double q) { return gap > 1.0 - q; }

/// One-shot bias: every link (i, j), i != j, with |x_i0 - x_j0| > 1 - q is removed and its
/// weight added to i's self-loop.
inline ListeningNetwork apply_core_bias(const ListeningNetwork& net, const BeliefState& x0,
                                        double q) {
  require_same_size(net, x0, "apply_core_bias");
  Matrix w = net.weights();
  const auto n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || w(i, j) == 0.0) continue;
      if (severs(std::abs(x0.beliefs(i) - x0.beliefs(j)), q)) {
        w(i, i) += w(i, j);
        w(i, j) = 0.0;
      }
    }
  }
  return build_network(std::move(w));
}

/// Severs the same links as apply_core_bias, but reroutes only phi of each severed weight to
/// the self-loop; the remaining (1 - phi) is spread over the agent's surviving non-self links
/// in proportion to their weights. With no surviving non-self weight, everything goes to the
/// self-loop.
inline ListeningNetwork apply_phi_bias(const ListeningNetwork& net, const BeliefState& x0,
                                       double q, double phi) {
  require_same_size(net, x0, "apply_phi_bias");
  if (!(phi >= 0.0 && phi <= 1.0)) throw Error(ErrorKind::config_invalid, "phi outside [0,1]");
  Matrix w = net.weights();
  const auto n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double severed = 0.0;
    double surviving = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || w(i, j) == 0.0) continue;
      if (severs(std::abs(x0.beliefs(i) - x0.beliefs(j)), q)) {
        severed += w(i, j);
        w(i, j) = 0.0;
      } else {
        surviving += w(i, j);
      }
    }
    if (severed == 0.0) continue;
    if (surviving == 0.0) {
      w(i, i) += severed;
      continue;
    }
    const double spread = (1.0 - phi) * severed;
    w(i, i) += phi * severed;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && w(i, j) > 0.0) w(i, j) += spread * (w(i, j) / surviving);
    }
  }
  return build_network(std::move(w));
}

/// One period of the generalized rule. Links from i to j with |x_it - x_jt| > 1 - q_i lose the
/// fraction alpha_ij of their current weight to i's self-loop. Weight is never restored, so
/// repeated application only moves weight towards the diagonal.
inline ListeningNetwork apply_generalized_bias(const ListeningNetwork& net_prev,
                                               const BeliefState& x_t, const BiasSpec& spec) {
  require_same_size(net_prev, x_t, "apply_generalized_bias");
  if (spec.mode != BiasMode::generalized) {
    throw Error(ErrorKind::mode_mismatch, "apply_generalized_bias needs a generalized BiasSpec");
  }
  if (spec.q.size() != 1) require_same_size(net_prev.n(), spec.q.size(), "bias q_vec");
  if (spec.alpha.size() != 0) {
    require_same_size(net_prev.n(), static_cast<std::size_t>(spec.alpha.rows()), "bias alpha");
  }
  Matrix w = net_prev.weights();
  const auto n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double qi = spec.q_for(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || w(i, j) == 0.0) continue;
      if (!severs(std::abs(x_t.beliefs(i) - x_t.beliefs(j)), qi)) continue;
      const double moved = spec.alpha_for(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * w(i, j);
      w(i, j) -= moved;
      w(i, i) += moved;
    }
  }
  return build_network(std::move(w));
}

/// Applies a spec the way it is applied at t = 0, whatever its mode.
inline ListeningNetwork apply_bias(const ListeningNetwork& net, const BeliefState& x0,
                                   const BiasSpec& spec) {
  switch (spec.mode) {
    case BiasMode::core: return apply_core_bias(net, x0, spec.q.front());
    case BiasMode::phi_extension: return apply_phi_bias(net, x0, spec.q.front(), spec.phi);
    case BiasMode::generalized: return apply_generalized_bias(net, x0, spec);
  }
  return net;
}

}  // namespace biaslab

#endif  // BIASLAB_BIAS_HPP
