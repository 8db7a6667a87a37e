#ifndef BIASLAB_TESTS_SUPPORT_HPP
#define BIASLAB_TESTS_SUPPORT_HPP

// Fixtures and independent oracles shared by the unit tests and the acceptance binary. The
// oracles deliberately avoid the library's own numerical paths: stationary distributions come
// from a dense linear solve, convergence times from explicit matrix powers with plain loops.

#include "biaslab/biaslab.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>
#include <vector>

namespace fixtures {

using biaslab::build_network;
using biaslab::ListeningNetwork;
using biaslab::Matrix;
using biaslab::Vector;

// Three agents A, B, C; A and B listen mostly to each other.
inline ListeningNetwork three_agent_network() {
  return build_network({{0.55, 0.4, 0.05}, {0.4, 0.55, 0.05}, {0.05, 0.05, 0.9}});
}
inline biaslab::BeliefState three_agent_beliefs() { return biaslab::make_beliefs({0.0, 1.0, 0.7}); }

// Four agents A, B, C, D with zero self-weight.
inline ListeningNetwork four_agent_network() {
  return build_network({{0.0, 0.55, 0.25, 0.2},
                        {0.8, 0.0, 0.2, 0.0},
                        {0.0, 0.7, 0.0, 0.3},
                        {0.7, 0.0, 0.3, 0.0}});
}
inline biaslab::BeliefState four_agent_beliefs() { return biaslab::make_beliefs({0.2, 0.5, 0.75, 0.9}); }

// Five voters with identical rows, and the banded network their bias leaves at q = 0.78.
inline std::vector<double> voting_row() { return {0.35, 0.1, 0.2, 0.25, 0.1}; }
inline ListeningNetwork voting_network() { return biaslab::complete_uniform(5, voting_row()); }
inline biaslab::BeliefState voting_beliefs() { return biaslab::make_beliefs({0.15, 0.3, 0.5, 0.65, 0.75}); }
inline Matrix voting_biased_weights() {
  Matrix m(5, 5);
  m << 0.9, 0.1, 0, 0, 0,
       0.35, 0.45, 0.2, 0, 0,
       0, 0.1, 0.65, 0.25, 0,
       0, 0, 0.2, 0.7, 0.1,
       0, 0, 0, 0.25, 0.75;
  return m;
}

/// Random connected symmetric network with self-weight at least `min_self` on every agent:
/// a ring plus random chords with random weights, scaled so no row leaves less than min_self
/// on the diagonal.
inline ListeningNetwork random_symmetric(std::size_t n, std::mt19937_64& rng, double min_self = 0.5,
                                         double density = 0.4) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::bernoulli_distribution chord(density);
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix a = Matrix::Zero(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = i + 1; j < nn; ++j) {
      const bool ring = j == i + 1 || (i == 0 && j == nn - 1);
      if (ring || chord(rng)) a(i, j) = a(j, i) = w(rng);
    }
  }
  const double max_row = a.rowwise().sum().maxCoeff();
  std::uniform_real_distribution<double> slack(0.0, 0.3);
  const double scale = (1.0 - min_self) * (1.0 - slack(rng)) / max_row;
  Matrix t = a * scale;
  for (Eigen::Index i = 0; i < nn; ++i) t(i, i) = 1.0 - t.row(i).sum();
  return build_network(t);
}

inline biaslab::BeliefState random_beliefs(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
  return biaslab::BeliefState{0, x};
}

/// Random strongly connected aperiodic network with no symmetry: a directed ring through all
/// agents plus random extra links and self-loops, rows normalized.
inline ListeningNetwork random_general(std::size_t n, std::mt19937_64& rng, double density = 0.4) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::bernoulli_distribution extra(density);
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix a = Matrix::Zero(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    a(i, (i + 1) % nn) = w(rng);
    for (Eigen::Index j = 0; j < nn; ++j) {
      if (extra(rng)) a(i, j) = w(rng);
    }
  }
  a(0, 0) += w(rng);
  for (Eigen::Index i = 0; i < nn; ++i) a.row(i) /= a.row(i).sum();
  return build_network(a);
}

}  // namespace fixtures

namespace oracle {

using biaslab::Matrix;
using biaslab::Vector;

/// Stationary distribution by solving s (T - I) = 0 with sum(s) = 1 replacing one equation.
inline Vector stationary_lu(const Matrix& t) {
  const auto n = t.rows();
  Matrix a = t.transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  return a.fullPivLu().solve(b);
}

/// min{t > 0 : (1/n) sum_i ||T^t(i,.) - s||^2 < eps} by explicit matrix powers with plain
/// loops, -1 when the horizon passes.
inline std::int64_t convergence_time_bruteforce(const Matrix& t, const Vector& s, double eps,
                                                std::int64_t horizon = 100000) {
  const auto n = t.rows();
  std::vector<double> p(static_cast<std::size_t>(n * n)), next(p.size()), base(p.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) base[static_cast<std::size_t>(i * n + j)] = t(i, j);
  }
  p = base;
  for (std::int64_t step = 1; step <= horizon; ++step) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d = p[static_cast<std::size_t>(i * n + j)] - s(j);
        total += d * d;
      }
    }
    if (total / static_cast<double>(n) < eps) return step;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          acc += p[static_cast<std::size_t>(i * n + k)] * base[static_cast<std::size_t>(k * n + j)];
        }
        next[static_cast<std::size_t>(i * n + j)] = acc;
      }
    }
    p.swap(next);
  }
  return -1;
}

/// Worst-case consensus time over the corners of [0,1]^n: the first t at which every corner
/// x0 has sum_i s_i (T^t x0 - s.x0)_i^2 < eps. The squared deviation is convex in x0, so the
/// corners attain the supremum over the cube.
inline std::int64_t worst_case_consensus_time(const Matrix& t, const Vector& s, double eps,
                                              std::int64_t horizon = 100000) {
  const auto n = t.rows();
  const std::size_t corners = std::size_t{1} << n;
  std::vector<Vector> states(corners);
  std::vector<double> limit(corners);
  for (std::size_t mask = 0; mask < corners; ++mask) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = (mask >> i) & 1U ? 1.0 : 0.0;
    limit[mask] = s.dot(x);
    states[mask] = x;
  }
  for (std::int64_t step = 0; step <= horizon; ++step) {
    bool all_close = true;
    for (std::size_t mask = 0; mask < corners && all_close; ++mask) {
      double dev = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = states[mask](i) - limit[mask];
        dev += s(i) * d * d;
      }
      if (!(dev < eps)) all_close = false;
    }
    if (all_close) return step;
    for (auto& x : states) x = t * x;
  }
  return -1;
}

/// Metropolis-Hastings weights written straight from the definition, self-weight included.
inline Matrix metropolis_hastings_literal(const biaslab::Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Matrix t = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double di = static_cast<double>(g.degree(static_cast<std::size_t>(i)));
    double self = 0.0;
    for (std::size_t k : g.neighbors[static_cast<std::size_t>(i)]) {
      const double dk = static_cast<double>(g.degree(k));
      t(i, static_cast<Eigen::Index>(k)) = std::min(1.0 / di, 1.0 / dk);
      self += std::max(0.0, 1.0 / di - 1.0 / dk);
    }
    t(i, i) = self;
  }
  return t;
}

}  // namespace oracle

#endif  // BIASLAB_TESTS_SUPPORT_HPP
