#ifndef BIASLAB_MEDIA_HPP
#define BIASLAB_MEDIA_HPP

#include "biaslab/common.hpp"
#include "biaslab/network_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace biaslab {

/// Equilibrium of the media market with M organizations and bias strength q. The fringe is
/// the left (smaller) ideology; its mirror 1 - fringe is also an equilibrium.
struct MediaMarket {
  int M = 1;
  double q = 0.0;
  bool exists = true;
  /// Point fringe ideology in [0, 1/2] (absent for M = 1 or when no equilibrium exists).
  std::optional<double> fringe;
  /// Monopoly: every ideology in this closed interval is an equilibrium.
  std::optional<std::pair<double, double>> interval;
  /// True when the fringe sits at 1 - q, i.e. the bias constraint binds.
  bool bias_binding = false;
};

inline MediaMarket fringe_ideology(int M, double q) {
  if (M < 1) throw Error(ErrorKind::bad_m, "need at least one media organization");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::precondition_violated, "q must lie in [0,1]");
  MediaMarket m;
  m.M = M;
  m.q = q;
  auto point = [&](double free_value, double threshold) {
    if (q <= threshold) {
      m.fringe = free_value;
    } else {
      m.fringe = 1.0 - q;
      m.bias_binding = true;
    }
  };
  switch (M) {
    case 1:
      m.interval = std::make_pair(std::min(q, 1.0 - q), std::max(q, 1.0 - q));
      break;
    case 2:
      point(0.5, 0.5);
      break;
    case 3:
      if (q <= 0.75) {
        m.exists = false;
      } else {
        m.fringe = 1.0 - q;
        m.bias_binding = true;
      }
      break;
    case 4:
      point(0.25, 0.75);
      break;
    case 5:
      point(1.0 / 6.0, 5.0 / 6.0);
      break;
    default: {
      const double free_value = 1.0 / static_cast<double>(2 * M - 4);
      point(free_value, 1.0 - free_value);
      break;
    }
  }
  return m;
}

/// Audience of each organization when beliefs are uniform on [0,1]: agents listen to the
/// closest organization provided it lies within 1 - q. Organizations sharing a position split
/// their cell equally.
inline std::vector<double> audience_share(const std::vector<double>& ideologies, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::precondition_violated, "q must lie in [0,1]");
  for (std::size_t k = 0; k < ideologies.size(); ++k) {
    if (!(ideologies[k] >= 0.0 && ideologies[k] <= 1.0)) {
      throw Error(ErrorKind::precondition_violated, "ideologies must lie in [0,1]");
    }
    if (k > 0 && ideologies[k] < ideologies[k - 1]) {
      throw Error(ErrorKind::precondition_violated, "ideologies must be sorted ascending");
    }
  }
  const double reach = 1.0 - q;
  std::vector<double> share(ideologies.size(), 0.0);
  std::size_t k = 0;
  while (k < ideologies.size()) {
    std::size_t end = k;
    while (end < ideologies.size() && ideologies[end] == ideologies[k]) ++end;
    const double p = ideologies[k];
    const double left = k == 0 ? 0.0 : 0.5 * (ideologies[k - 1] + p);
    const double right = end == ideologies.size() ? 1.0 : 0.5 * (p + ideologies[end]);
    const double lo = std::max(left, p - reach);
    const double hi = std::min(right, p + reach);
    const double cell = std::max(0.0, hi - lo) / static_cast<double>(end - k);
    for (std::size_t j = k; j < end; ++j) share[j] = cell;
    k = end;
  }
  return share;
}

/// CSV rows (M, q, fringe, exists) over a grid; the M = 1 interval is written lo:hi.
/// Closed-form positions are printed to 15 significant digits so that, e.g., 1 - 0.8 reads 0.2.
inline std::string format_position(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline void write_media_table(std::ostream& out, const std::vector<int>& Ms, const std::vector<double>& qs) {
  out << "M,q,fringe,exists\n";
  for (int M : Ms) {
    for (double q : qs) {
      const MediaMarket m = fringe_ideology(M, q);
      out << M << ',' << format_real(q) << ',';
      if (m.fringe) {
        out << format_position(*m.fringe);
      } else if (m.interval) {
        out << format_position(m.interval->first) << ':' << format_position(m.interval->second);
      }
      out << ',' << (m.exists ? 1 : 0) << '\n';
    }
  }
}

}  // namespace biaslab

#endif  // BIASLAB_MEDIA_HPP
