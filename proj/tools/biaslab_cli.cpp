// Command-line front end for the biaslab toolkit.

#include "biaslab/biaslab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace biaslab;
using nlohmann::json;

namespace {

enum class Format { csv, json };

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  unsigned threads = 1;
  Format format = Format::csv;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse_error, "not a number: '" + item + "'");
    }
  }
  return v;
}

/// Writes to the --out file when given, else stdout.
void emit(const Globals& g, const std::string& text, const std::string& default_name = "") {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  fs::path path(g.out);
  if (!default_name.empty() && (fs::is_directory(path) || g.out.back() == '/')) {
    fs::create_directories(path);
    path /= default_name;
  } else if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream(path) << text;
}

std::string network_text(const ListeningNetwork& net, Format f) {
  if (f == Format::json) return network_to_json(net).dump() + "\n";
  std::ostringstream out;
  write_network_text(out, net);
  return out.str();
}

std::optional<BiasSpec> bias_from_flags(const std::optional<double>& q, const std::optional<double>& phi) {
  if (!q) return std::nullopt;
  if (phi && *phi != 1.0) return BiasSpec::phi_extension(*q, *phi);
  return BiasSpec::core(*q);
}

Graph graph_from_matrix(const Matrix& m) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if ((m(i, j) != 0.0) != (m(j, i) != 0.0)) {
        throw Error(ErrorKind::precondition_violated, "graph adjacency must be symmetric");
      }
      if (i < j && m(i, j) != 0.0) edges.emplace_back(i, j);
    }
  }
  return Graph::from_edges(static_cast<std::size_t>(m.rows()), edges);
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse_error, "cannot open " + path);
  return read_matrix_text(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confirmation-bias social learning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::string format_name = "csv";
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--threads", g.threads, "Worker threads (speed only; BIASLAB_THREADS overrides)");
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "json"}));

  // generate
  auto* gen = app.add_subcommand("generate", "Build a network and write it out");
  std::string family = "meeting";
  GeneratorParams gp;
  std::size_t degree = 4;
  std::optional<double> diagonal;
  gen->add_option("--family", family)->check(CLI::IsMember({"meeting", "circulant", "complete", "regular"}));
  gen->add_option("--n", gp.n);
  gen->add_option("--m0", gp.m0);
  gen->add_option("--random-meetings", gp.random_meetings);
  gen->add_option("--random-link-prob", gp.random_link_prob);
  gen->add_option("--neighbor-meetings", gp.neighbor_meetings);
  gen->add_option("--neighbor-link-prob", gp.neighbor_link_prob);
  gen->add_option("--degree", degree, "Degree for circulant/regular families");
  gen->add_option("--diagonal", diagonal, "Common self-weight for the complete family");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the learning process on a network file");
  std::string network_path, beliefs_text;
  std::optional<double> q_opt, phi_opt;
  double eps = calibrated_eps;
  std::int64_t t_max = default_t_max;
  std::uint64_t tie_seed = 0;
  std::string swing_name = "coin";
  run_cmd->add_option("--network", network_path)->required();
  run_cmd->add_option("--beliefs", beliefs_text)->required();
  run_cmd->add_option("--q", q_opt);
  run_cmd->add_option("--phi", phi_opt);
  run_cmd->add_option("--eps", eps);
  run_cmd->add_option("--t-max", t_max);
  run_cmd->add_option("--tie-seed", tie_seed);
  run_cmd->add_option("--swing", swing_name)->check(CLI::IsMember({"coin", "left"}));

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a seeded Monte Carlo experiment");
  std::string config_path, preset_name;
  auto* cfg_opt = sweep->add_option("--config", config_path);
  sweep->add_option("--preset", preset_name, "set1-desk, set1-full, set2-desk or set2-full")->excludes(cfg_opt);

  // spectra
  auto* spectra = app.add_subcommand("spectra", "Spectral summary of a network file");
  std::string spectra_path;
  spectra->add_option("network", spectra_path)->required();

  // voting
  auto* voting = app.add_subcommand("voting", "Per-period elections along a trajectory");
  voting->add_option("--network", network_path)->required();
  voting->add_option("--beliefs", beliefs_text)->required();
  voting->add_option("--q", q_opt);
  voting->add_option("--phi", phi_opt);
  voting->add_option("--eps", eps);
  voting->add_option("--horizon", t_max, "Periods to simulate");
  voting->add_option("--tie-seed", tie_seed);
  voting->add_option("--swing", swing_name)->check(CLI::IsMember({"coin", "left"}));

  // media
  auto* media = app.add_subcommand("media", "Fringe media ideology table");
  std::string m_list = "1,2,3,4,5,6,10", q_list;
  media->add_option("--M", m_list, "Comma-separated organization counts");
  media->add_option("--q", q_list, "Comma-separated q values (default: 0, 0.05, ..., 1)");

  // octopus
  auto* oct = app.add_subcommand("octopus", "Build the octopus network for beliefs and q");
  double oct_q = 0.5;
  oct->add_option("--beliefs", beliefs_text)->required();
  oct->add_option("--q", oct_q)->required();

  // weights
  auto* weights = app.add_subcommand("weights", "Weight an unweighted symmetric graph");
  std::string heuristic, graph_path;
  weights->add_option("--heuristic", heuristic)->required()->check(CLI::IsMember({"maxdeg", "mh"}));
  weights->add_option("graph", graph_path, "Adjacency matrix file (nonzero = edge)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (format_name == "json" && e.get_exit_code() != 0) {
      std::cout << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << '\n';
      return e.get_exit_code();
    }
    return app.exit(e);
  }
  g.format = format_name == "json" ? Format::json : Format::csv;
  g.seed_given = app.get_option("--seed")->count() > 0;
  const SwingRule swing = swing_name == "left" ? SwingRule::left : SwingRule::coin;

  try {
    if (*gen) {
      ListeningNetwork net = build_network(Matrix::Identity(1, 1));
      if (family == "meeting") {
        gp.seed = g.seed;
        net = generate_meeting_network(gp);
      } else if (family == "circulant") {
        net = circulant(gp.n, degree);
      } else if (family == "complete") {
        net = diagonal ? complete_with_diagonal(gp.n, *diagonal) : complete_uniform(gp.n);
      } else {
        Engine rng(g.seed);
        net = max_degree_weights(random_regular_graph(gp.n, degree, rng));
      }
      emit(g, network_text(net, g.format), g.format == Format::json ? "network.json" : "network.txt");
    } else if (*run_cmd || *voting) {
      const ListeningNetwork net = load_network(network_path);
      const BeliefState x0 = make_beliefs(as_vector(parse_list(beliefs_text)));
      const auto spec = bias_from_flags(q_opt, phi_opt);
      const Trajectory traj = *run_cmd ? run(net, x0, spec, eps, t_max) : run_through(net, x0, spec, eps, t_max);
      const ElectionRecord rec = detect_shock(traj, tie_seed, swing);
      if (*voting) {
        if (g.format == Format::json) {
          json periods = json::array();
          for (std::size_t t = 0; t < rec.periods.size(); ++t) {
            const auto& p = rec.periods[t];
            periods.push_back({{"t", t}, {"votes_left", p.votes_left}, {"votes_right", p.votes_right},
                               {"winner", to_string(p.winner)}});
          }
          emit(g, json{{"shock_times", rec.shock_times}, {"in_scope", rec.in_scope}, {"periods", periods}}.dump(2) + "\n",
               "elections.json");
        } else {
          std::ostringstream out;
          write_election_csv(out, rec);
          emit(g, out.str(), "elections.csv");
        }
      } else {
        json j;
        j["belief_convergence_time"] = traj.belief_convergence_time ? json(*traj.belief_convergence_time) : json(nullptr);
        j["consensus"] = traj.consensus_value ? json(*traj.consensus_value) : json(nullptr);
        j["periods"] = traj.states.size() - 1;
        j["final_beliefs"] = std::vector<double>(traj.states.back().beliefs.data(),
                                                 traj.states.back().beliefs.data() + traj.states.back().n());
        j["shock_times"] = rec.shock_times;
        j["shock"] = !rec.shock_times.empty();
        if (!g.out.empty()) {
          fs::create_directories(g.out);
          std::ofstream traj_out(fs::path(g.out) / "trajectory.csv");
          write_trajectory_csv(traj_out, traj);
          std::ofstream elec_out(fs::path(g.out) / "elections.csv");
          write_election_csv(elec_out, rec);
          std::ofstream(fs::path(g.out) / "run.json") << j.dump(2) << '\n';
        }
        if (g.format == Format::json) {
          std::cout << j.dump(2) << '\n';
        } else {
          std::cout << "belief_convergence_time," << j["belief_convergence_time"].dump() << '\n'
                    << "consensus," << (traj.consensus_value ? format_real(*traj.consensus_value) : "null") << '\n'
                    << "shock_times," << detail::join_times(rec.shock_times) << '\n';
        }
      }
    } else if (*sweep) {
      if (config_path.empty() && preset_name.empty()) {
        throw Error(ErrorKind::config_invalid, "sweep needs --config or --preset");
      }
      ScenarioConfig c = config_path.empty() ? preset(preset_name) : load_scenario(config_path);
      if (g.seed_given) c.master_seed = g.seed;
      const auto records = run_experiment(c, g.threads);
      const fs::path dir = g.out.empty() ? fs::path("sweep_out") : fs::path(g.out);
      const json summary = write_outputs(dir, c, records);
      if (g.format == Format::json) {
        std::cout << summary.dump(2) << '\n';
      } else {
        std::cout << "runs," << records.size() << "\nno_bias_mean," << summary["no_bias"]["mean"].dump()
                  << "\nbias_mean," << summary["bias"]["mean"].dump() << "\noutput," << dir.string() << '\n';
      }
    } else if (*spectra) {
      const ListeningNetwork net = load_network(spectra_path);
      const SpectralSummary s = spectrum(net);
      if (g.format == Format::json) {
        emit(g, to_json(s).dump(2) + "\n", "spectrum.json");
      } else {
        std::ostringstream out;
        out << "kind,index,value\n";
        for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) out << "eigenvalue," << i << ',' << format_real(s.eigenvalues[i]) << '\n';
        for (std::size_t i = 0; i < s.influence.size(); ++i) out << "influence," << i << ',' << format_real(s.influence[i]) << '\n';
        out << "slem,0," << format_real(s.slem) << '\n';
        emit(g, out.str(), "spectrum.csv");
      }
    } else if (*media) {
      std::vector<int> Ms;
      for (double m : parse_list(m_list)) Ms.push_back(static_cast<int>(m));
      std::vector<double> qs = q_list.empty() ? std::vector<double>{} : parse_list(q_list);
      if (qs.empty()) {
        for (int k = 0; k <= 20; ++k) qs.push_back(k / 20.0);
      }
      if (Ms.size() == 1 && qs.size() == 1 && g.format == Format::csv && g.out.empty()) {
        const MediaMarket m = fringe_ideology(Ms[0], qs[0]);
        if (m.fringe) {
          std::cout << format_position(*m.fringe) << '\n';
        } else if (m.interval) {
          std::cout << format_position(m.interval->first) << ':' << format_position(m.interval->second) << '\n';
        } else {
          std::cout << "none\n";
        }
      } else if (g.format == Format::json) {
        json rows = json::array();
        for (int M : Ms) {
          for (double q : qs) {
            const MediaMarket m = fringe_ideology(M, q);
            json row{{"M", M}, {"q", q}, {"exists", m.exists}};
            row["fringe"] = m.fringe ? json(*m.fringe) : json(nullptr);
            if (m.interval) row["interval"] = {m.interval->first, m.interval->second};
            rows.push_back(row);
          }
        }
        emit(g, rows.dump(2) + "\n", "media.json");
      } else {
        std::ostringstream out;
        write_media_table(out, Ms, qs);
        emit(g, out.str(), "media.csv");
      }
    } else if (*oct) {
      const BeliefState x0 = make_beliefs(as_vector(parse_list(beliefs_text)));
      const OctopusNetwork o = octopus(x0, oct_q);
      emit(g, network_text(o.network, g.format), g.format == Format::json ? "octopus.json" : "octopus.txt");
    } else if (*weights) {
      const Graph graph = graph_from_matrix(read_matrix_file(graph_path));
      const ListeningNetwork net = heuristic == "maxdeg" ? max_degree_weights(graph) : metropolis_hastings_weights(graph);
      emit(g, network_text(net, g.format), g.format == Format::json ? "weights.json" : "weights.txt");
    }
  } catch (const Error& e) {
    if (g.format == Format::json) {
      std::cout << json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << '\n';
    } else {
      std::cerr << "error: " << e.what() << '\n';
    }
    return 2;
  } catch (const std::exception& e) {
    if (g.format == Format::json) {
      std::cout << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    } else {
      std::cerr << "error: " << e.what() << '\n';
    }
    return 3;
  }
  return 0;
}
