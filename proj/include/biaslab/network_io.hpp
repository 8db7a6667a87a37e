#ifndef BIASLAB_NETWORK_IO_HPP
#define BIASLAB_NETWORK_IO_HPP

#include "biaslab/network.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace biaslab {

/// Shortest decimal rendering that survives a round trip (17 significant digits).
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Plain-text format: one row per line, whitespace-separated weights.
// Blank lines and lines starting with '#' are ignored.

inline void write_network_text(std::ostream& out, const ListeningNetwork& net) {
  const auto& w = net.weights();
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j) out << ' ';
      out << format_real(w(i, j));
    }
    out << '\n';
  }
}

inline Matrix read_matrix_text(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string token;
    while (ls >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorKind::parse_error, "bad weight '" + token + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m.cols()) {
      throw Error(ErrorKind::non_square, "row " + std::to_string(i) + " has " +
                                             std::to_string(rows[i].size()) + " entries");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

inline nlohmann::json network_to_json(const ListeningNetwork& net) {
  nlohmann::json rows = nlohmann::json::array();
  const auto& w = net.weights();
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < w.cols(); ++j) row.push_back(w(i, j));
    rows.push_back(std::move(row));
  }
  return {{"n", net.n()}, {"weights", std::move(rows)}};
}

inline ListeningNetwork network_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("n").get<std::size_t>();
    const auto& rows = doc.at("weights");
    if (rows.size() != n) throw Error(ErrorKind::non_square, "weights has wrong row count");
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw Error(ErrorKind::non_square, "ragged weights row");
      for (std::size_t j = 0; j < n; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
      }
    }
    return build_network(std::move(m));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse_error, e.what());
  }
}

/// Loads a network from disk; ".json" files use the JSON schema, anything else the text format.
inline ListeningNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse_error, "cannot open " + path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::parse_error, e.what());
    }
    return network_from_json(doc);
  }
  return build_network(read_matrix_text(in));
}

inline void save_network(const std::string& path, const ListeningNetwork& net) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::parse_error, "cannot write " + path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    out << network_to_json(net).dump() << '\n';
  } else {
    write_network_text(out, net);
  }
}

}  // namespace biaslab

#endif  // BIASLAB_NETWORK_IO_HPP
