#ifndef BIASLAB_SPECTRAL_HPP
#define BIASLAB_SPECTRAL_HPP

#include "biaslab/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace biaslab {

enum class SpectralMethod { symmetric_exact, general_power };

inline std::string_view to_string(SpectralMethod m) {
  return m == SpectralMethod::symmetric_exact ? "symmetric_exact" : "general_power";
}

/// Eigen-summary of a listening network.
///
/// For symmetric networks `eigenvalues` is the full real spectrum sorted descending. For
/// general networks only the two quantities the analysis needs are available: the stationary
/// eigenvalue 1 and the modulus estimate of the second eigenvalue, in that order.
struct SpectralSummary {
  std::vector<double> eigenvalues;
  std::vector<double> influence;
  double slem = 0.0;
  SpectralMethod method = SpectralMethod::symmetric_exact;
};

struct PowerIterationOptions {
  double tolerance = 1e-12;
  std::int64_t max_iterations = 1'000'000;
};

namespace detail {

inline void require_ergodic(const ListeningNetwork& net, std::string_view where) {
  if (!net.is_ergodic()) {
    throw Error(ErrorKind::not_ergodic,
                std::string(where) + ": network must be strongly connected and aperiodic");
  }
}

}  // namespace detail

/// Influence vector s (left eigenvector for eigenvalue 1, summing to 1) by power iteration on
/// the transpose, seeded with the uniform vector. Converges when the L1 change between sweeps
/// drops below the tolerance.
inline Vector influence_power(const ListeningNetwork& net, PowerIterationOptions opt = {}) {
  detail::require_ergodic(net, "influence");
  const auto n = static_cast<Eigen::Index>(net.n());
  const Matrix tt = net.weights().transpose();
  Vector s = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector next(n);
  for (std::int64_t it = 1; it <= opt.max_iterations; ++it) {
    next.noalias() = tt * s;
    next /= next.sum();
    const double change = (next - s).lpNorm<1>();
    s.swap(next);
    if (change < opt.tolerance) return s;
  }
  throw Error(ErrorKind::no_convergence,
              "influence power iteration stalled after " + std::to_string(opt.max_iterations) +
                  " iterations");
}

/// Modulus of the second eigenvalue of a general network, by block power iteration on left
/// vectors with the stationary component deflated each step. A Rayleigh-Ritz step on the block
/// resolves complex pairs, whose individual iterates would otherwise oscillate.
inline double second_eigenvalue_modulus(const ListeningNetwork& net, const Vector& influence,
                                        PowerIterationOptions opt = {}) {
  const auto n = static_cast<Eigen::Index>(net.n());
  if (n < 2) return 0.0;
  const Matrix tt = net.weights().transpose();
  const Eigen::Index k = std::min<Eigen::Index>(n - 1, 4);
  auto deflate = [&](Matrix& y) {
    for (Eigen::Index c = 0; c < y.cols(); ++c) y.col(c) -= y.col(c).sum() * influence;
  };
  auto orthonormal = [&](const Matrix& y) -> Matrix {
    Eigen::HouseholderQR<Matrix> qr(y);
    return qr.householderQ() * Matrix::Identity(n, k);
  };
  // Deterministic start with zero column sums and no special symmetry.
  Matrix y(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < k; ++c) {
      y(i, c) = std::sin(1.0 + 2.6180339887 * static_cast<double>(i) + 0.7071 * static_cast<double>(c * c + c));
    }
  }
  deflate(y);
  Matrix q = orthonormal(y);
  double previous = -1.0;
  int stable = 0;
  const std::int64_t cap = std::min<std::int64_t>(opt.max_iterations, 100'000);
  for (std::int64_t it = 1; it <= cap; ++it) {
    Matrix z = tt * q;
    deflate(z);
    const Matrix h = q.transpose() * z;
    if (z.norm() < 1e-280) return 0.0;
    q = orthonormal(z);
    const Eigen::VectorXcd ritz = Eigen::EigenSolver<Matrix>(h, false).eigenvalues();
    double estimate = 0.0;
    for (Eigen::Index i = 0; i < ritz.size(); ++i) estimate = std::max(estimate, std::abs(ritz(i)));
    stable = std::abs(estimate - previous) < 1e-14 ? stable + 1 : 0;
    if (stable >= 8) return estimate;
    previous = estimate;
  }
  return previous;
}

/// Eigen-analysis. Symmetric networks use a self-adjoint tridiagonal QL solver; anything else
/// falls back to power iteration for the influence vector and the second-eigenvalue modulus.
inline SpectralSummary spectrum(const ListeningNetwork& net, PowerIterationOptions opt = {}) {
  SpectralSummary out;
  const std::size_t n = net.n();
  if (net.is_symmetric()) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(net.weights(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::no_convergence, "symmetric eigen-solver failed");
    }
    const Vector& ev = solver.eigenvalues();  // ascending
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());
    out.influence.assign(n, 1.0 / static_cast<double>(n));
    if (n >= 2) out.slem = std::max(std::abs(out.eigenvalues[1]), std::abs(out.eigenvalues.back()));
    out.method = SpectralMethod::symmetric_exact;
    return out;
  }
  const Vector s = influence_power(net, opt);
  out.influence.assign(s.data(), s.data() + s.size());
  out.slem = second_eigenvalue_modulus(net, s, opt);
  out.eigenvalues = {1.0, out.slem};
  out.method = SpectralMethod::general_power;
  return out;
}

inline Vector as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Dirichlet energy 1/2 * sum_ij (f_i - f_j)^2 s_i T_ij.
inline double dirichlet_energy(const ListeningNetwork& net, const Vector& f,
                               const std::vector<double>& influence) {
  require_same_size(net.n(), static_cast<std::size_t>(f.size()), "dirichlet_energy");
  require_same_size(net.n(), influence.size(), "dirichlet_energy influence");
  double energy = 0.0;
  const auto& w = net.weights();
  for (std::size_t i = 0; i < net.n(); ++i) {
    for (std::size_t j : net.adjacency()[i]) {
      const double d = f(static_cast<Eigen::Index>(i)) - f(static_cast<Eigen::Index>(j));
      energy += d * d * influence[i] * w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return 0.5 * energy;
}

inline double dirichlet_energy(const ListeningNetwork& net, const Vector& f) {
  detail::require_ergodic(net, "dirichlet_energy");
  return dirichlet_energy(net, f, spectrum(net).influence);
}

inline constexpr std::int64_t convergence_horizon = 1'000'000;

/// Average convergence time from the spectrum of a symmetric network:
/// min { t > 0 : (1/n) sum_{k>=2} lambda_k^{2t} < eps }.
inline std::int64_t average_convergence_time_spectral(const std::vector<double>& eigenvalues,
                                                      double eps) {
  const std::size_t n = eigenvalues.size();
  auto metric = [&](std::int64_t t) {
    double sum = 0.0;
    for (std::size_t k = 1; k < n; ++k) sum += std::pow(eigenvalues[k], 2.0 * static_cast<double>(t));
    return sum / static_cast<double>(n);
  };
  if (metric(1) < eps) return 1;
  if (!(metric(convergence_horizon) < eps)) {
    throw Error(ErrorKind::exceeded_horizon, "average convergence time exceeds 10^6 periods");
  }
  // The metric is non-increasing in t, so bisect on the first passing period.
  std::int64_t lo = 1, hi = convergence_horizon;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (metric(mid) < eps ? hi : lo) = mid;
  }
  return hi;
}

/// Average convergence time by iterating matrix powers:
/// min { t > 0 : (1/n) sum_i ||T^t(i,.) - s||_2^2 < eps }.
inline std::int64_t average_convergence_time_direct(const ListeningNetwork& net, double eps,
                                                    const std::vector<double>& influence) {
  const auto n = static_cast<Eigen::Index>(net.n());
  const Eigen::RowVectorXd s = as_vector(influence).transpose();
  Matrix power = net.weights();
  Matrix next(n, n);
  for (std::int64_t t = 1; t <= convergence_horizon; ++t) {
    const double metric = (power.rowwise() - s).squaredNorm() / static_cast<double>(n);
    if (metric < eps) return t;
    next.noalias() = power * net.weights();
    power.swap(next);
  }
  throw Error(ErrorKind::exceeded_horizon, "average convergence time exceeds 10^6 periods");
}

/// Average convergence time tau. Symmetric networks use the spectral form; others iterate.
inline std::int64_t average_convergence_time(const ListeningNetwork& net, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::precondition_violated, "eps must be positive");
  detail::require_ergodic(net, "average_convergence_time");
  const SpectralSummary summary = spectrum(net);
  if (summary.method == SpectralMethod::symmetric_exact) {
    return average_convergence_time_spectral(summary.eigenvalues, eps);
  }
  return average_convergence_time_direct(net, eps, summary.influence);
}

struct ConsensusTimeBounds {
  std::int64_t lower = 0;
  std::int64_t upper = 0;
};

/// Bracket on the worst-case consensus time from the second-eigenvalue modulus and the
/// smallest influence. Natural logs; the base cancels in each ratio.
inline ConsensusTimeBounds consensus_time_bounds(double slem, double min_influence, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw Error(ErrorKind::precondition_violated, "eps must lie in (0, 1]");
  }
  if (slem == 0.0) return {0, 1};
  if (!(slem < 1.0)) throw Error(ErrorKind::not_ergodic, "second eigenvalue modulus is 1");
  const double denom = 2.0 * std::log(1.0 / slem);
  const double lower = (std::log(1.0 / (4.0 * eps)) - std::log(1.0 / min_influence)) / denom;
  const double upper = std::log(1.0 / eps) / denom;
  return {std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(lower))),
          static_cast<std::int64_t>(std::ceil(upper))};
}

inline ConsensusTimeBounds consensus_time_bounds(const ListeningNetwork& net, double eps) {
  detail::require_ergodic(net, "consensus_time_bounds");
  const SpectralSummary summary = spectrum(net);
  const double min_s = *std::min_element(summary.influence.begin(), summary.influence.end());
  return consensus_time_bounds(summary.slem, min_s, eps);
}

struct MonotonicityReport {
  std::vector<double> before;  ///< eigenvalues of T, descending
  std::vector<double> after;   ///< eigenvalues of T*, descending
  bool pass = true;
  /// Largest lambda_j - lambda*_j over j (<= slack means pass).
  double worst_violation = 0.0;
};

/// Index-by-index comparison lambda*_j >= lambda_j for two symmetric networks whose
/// self-weights are all at least one half.
inline MonotonicityReport eigen_monotonicity_check(const ListeningNetwork& t,
                                                   const ListeningNetwork& t_star,
                                                   double slack = 1e-9) {
  auto check = [](const ListeningNetwork& net, const char* name) {
    if (!net.is_symmetric()) {
      throw Error(ErrorKind::precondition_violated, std::string(name) + " is not symmetric");
    }
    for (Eigen::Index i = 0; i < net.weights().rows(); ++i) {
      if (net.weights()(i, i) < 0.5 - tol::equality) {
        throw Error(ErrorKind::precondition_violated,
                    std::string(name) + " has a self-weight below 1/2");
      }
    }
  };
  check(t, "T");
  check(t_star, "T*");
  require_same_size(t.n(), t_star.n(), "eigen_monotonicity_check");

  MonotonicityReport report;
  report.before = spectrum(t).eigenvalues;
  report.after = spectrum(t_star).eigenvalues;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < report.before.size(); ++j) {
    report.worst_violation = std::max(report.worst_violation, report.before[j] - report.after[j]);
  }
  report.pass = report.worst_violation <= slack;
  return report;
}

inline nlohmann::json to_json(const SpectralSummary& s) {
  return {{"eigenvalues", s.eigenvalues},
          {"influence", s.influence},
          {"slem", s.slem},
          {"method", std::string(to_string(s.method))}};
}

}  // namespace biaslab

#endif  // BIASLAB_SPECTRAL_HPP
