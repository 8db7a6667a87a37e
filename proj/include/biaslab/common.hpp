#ifndef BIASLAB_COMMON_HPP
#define BIASLAB_COMMON_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace biaslab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numeric tolerances shared by every module.
namespace tol {
/// Equality of weights (symmetry, structural comparisons).
inline constexpr double equality = 1e-12;
/// Row-sum deviation that is silently renormalized.
inline constexpr double stochastic = 1e-9;
/// Row-sum deviations above this are divided out; smaller ones are floating-point noise.
inline constexpr double renormalize = 1e-14;
/// Entries above -clamp are treated as rounding noise and set to zero.
inline constexpr double clamp = 1e-12;
}  // namespace tol

enum class ErrorKind {
  non_square,
  negative_weight,
  row_sum_violation,
  dimension_mismatch,
  mode_mismatch,
  not_ergodic,
  no_convergence,
  exceeded_horizon,
  precondition_violated,
  shape_mismatch,
  generation_failed,
  no_center_pair,
  infeasible,
  bad_degree,
  empty_graph,
  bad_row,
  bad_m,
  config_invalid,
  parse_error,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::non_square: return "NonSquare";
    case ErrorKind::negative_weight: return "NegativeWeight";
    case ErrorKind::row_sum_violation: return "RowSumViolation";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::mode_mismatch: return "ModeMismatch";
    case ErrorKind::not_ergodic: return "NotErgodic";
    case ErrorKind::no_convergence: return "NoConvergence";
    case ErrorKind::exceeded_horizon: return "ExceededHorizon";
    case ErrorKind::precondition_violated: return "PreconditionViolated";
    case ErrorKind::shape_mismatch: return "ShapeMismatch";
    case ErrorKind::generation_failed: return "GenerationFailed";
    case ErrorKind::no_center_pair: return "NoCenterPair";
    case ErrorKind::infeasible: return "Infeasible";
    case ErrorKind::bad_degree: return "BadDegree";
    case ErrorKind::empty_graph: return "EmptyGraph";
    case ErrorKind::bad_row: return "BadRow";
    case ErrorKind::bad_m: return "BadM";
    case ErrorKind::config_invalid: return "ConfigInvalid";
    case ErrorKind::parse_error: return "ParseError";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying its kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require_same_size(std::size_t expected, std::size_t actual, std::string_view where) {
  if (expected != actual) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(where) + ": expected length " + std::to_string(expected) + ", got " +
                    std::to_string(actual));
  }
}

}  // namespace biaslab

#endif  // BIASLAB_COMMON_HPP
