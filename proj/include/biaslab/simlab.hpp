#ifndef BIASLAB_SIMLAB_HPP
#define BIASLAB_SIMLAB_HPP

#include "biaslab/bias.hpp"
#include "biaslab/builders.hpp"
#include "biaslab/learn.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/network_io.hpp"
#include "biaslab/rng.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace biaslab {

inline constexpr int scenario_schema_version = 1;

/// Belief-convergence threshold that reproduces the three-agent example period counts on the
/// max-spread criterion.
inline constexpr double calibrated_eps = 1e-3;

/// Threshold used by the sweep presets; reproduces the no-bias convergence histogram of the
/// n = 1000 meeting networks.
inline constexpr double simulation_eps = 1e-4;

enum class Experiment { uniform_beliefs, discrete_voting, custom };
enum class BeliefSource { uniform01, buckets };

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::uniform_beliefs: return "uniform_beliefs";
    case Experiment::discrete_voting: return "discrete_voting";
    case Experiment::custom: return "custom";
  }
  return "?";
}

/// Bucket sampler: f_S fixed, f_EL ~ U[el_lo, el_hi], f_CL = left_total - f_EL,
/// f_CR ~ U[cr_lo, cr_hi], f_ER = right_total - f_CR, with f_CR redrawn until the mean belief
/// is below 1/2.
struct BucketSampler {
  std::array<double, 5> positions{0.0, 0.25, 0.5, 0.75, 1.0};
  double f_swing = 0.2;
  double el_lo = 0.1, el_hi = 0.35, left_total = 0.45;
  double cr_lo = 0.1, cr_hi = 0.25, right_total = 0.35;
  int max_redraws = 10'000;

  BeliefBuckets draw(Engine& rng) const {
    BeliefBuckets b;
    b.positions = positions;
    const double f_el = std::uniform_real_distribution<double>(el_lo, el_hi)(rng);
    std::uniform_real_distribution<double> cr(cr_lo, cr_hi);
    for (int k = 0; k < max_redraws; ++k) {
      const double f_cr = cr(rng);
      b.fractions = {f_el, left_total - f_el, f_swing, f_cr, right_total - f_cr};
      if (b.mean() < 0.5) return b;
    }
    throw Error(ErrorKind::config_invalid, "bucket sampler cannot reach a mean below 1/2");
  }

  void validate() const {
    if (std::abs(f_swing + left_total + right_total - 1.0) > tol::equality) {
      throw Error(ErrorKind::config_invalid, "bucket totals must sum to 1");
    }
    if (!(0.0 < el_lo && el_lo <= el_hi && el_hi < left_total)) {
      throw Error(ErrorKind::config_invalid, "bad f_EL range");
    }
    if (!(0.0 < cr_lo && cr_lo <= cr_hi && cr_hi < right_total)) {
      throw Error(ErrorKind::config_invalid, "bad f_CR range");
    }
    BeliefBuckets probe;
    probe.positions = positions;
    probe.fractions = {el_lo, left_total - el_lo, f_swing, cr_lo, right_total - cr_lo};
    probe.validate();
  }
};

/// Agent beliefs for a bucket draw: counts by largest remainder, then a random placement.
inline Vector assign_buckets(const BeliefBuckets& b, std::size_t n, Engine& rng) {
  std::array<std::size_t, 5> count{};
  std::array<double, 5> remainder{};
  std::size_t total = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    const double exact = b.fractions[k] * static_cast<double>(n);
    count[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - static_cast<double>(count[k]);
    total += count[k];
  }
  while (total < n) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 5; ++k) {
      if (remainder[k] > remainder[best]) best = k;
    }
    ++count[best];
    remainder[best] = -1.0;
    ++total;
  }
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t k = 0; k < 5; ++k) values.insert(values.end(), count[k], b.positions[k]);
  std::shuffle(values.begin(), values.end(), rng);
  return as_vector(values);
}

struct QSource {
  bool uniform = false;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;

  double draw(Engine& rng) const {
    return uniform ? std::uniform_real_distribution<double>(lo, hi)(rng) : value;
  }
};

struct ScenarioConfig {
  Experiment experiment = Experiment::uniform_beliefs;
  std::optional<GeneratorParams> generator = GeneratorParams{};
  std::optional<std::string> network_file;
  std::int64_t n_networks = 1000;
  std::int64_t n_assignments = 100;
  BeliefSource beliefs = BeliefSource::uniform01;
  BucketSampler buckets;
  QSource q{true, 0.0, 0.05, 0.15};
  BiasSpec bias = BiasSpec::core(0.0);
  double eps = simulation_eps;
  std::int64_t t_max = default_t_max;
  std::int64_t election_extra_periods = 100;
  SwingRule swing = SwingRule::coin;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (n_networks < 1 || n_assignments < 1) {
      throw Error(ErrorKind::config_invalid, "n_networks and n_assignments must be positive");
    }
    if (generator.has_value() == network_file.has_value()) {
      throw Error(ErrorKind::config_invalid, "specify exactly one of network.generator or network.file");
    }
    if (generator) generator->validate();
    if (!(eps > 0.0)) throw Error(ErrorKind::config_invalid, "eps must be positive");
    if (t_max < 1) throw Error(ErrorKind::config_invalid, "t_max must be at least 1");
    if (election_extra_periods < 0) throw Error(ErrorKind::config_invalid, "negative election window");
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (q.uniform ? !(unit(q.lo) && unit(q.hi) && q.lo <= q.hi) : !unit(q.value)) {
      throw Error(ErrorKind::config_invalid, "q source outside [0,1]");
    }
    if (bias.mode == BiasMode::generalized && bias.q.size() > 1) {
      throw Error(ErrorKind::config_invalid, "scenario bias draws a common q; per-agent q is not supported here");
    }
    if (beliefs == BeliefSource::buckets) buckets.validate();
  }

  /// Bias used for one run, with the drawn q substituted.
  BiasSpec bias_for(double q_drawn) const {
    BiasSpec spec = bias;
    spec.q = {q_drawn};
    spec.validate();
    return spec;
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline BiasSpec bias_from_json(const nlohmann::json& j) {
  BiasSpec b;
  const std::string mode = j.value("mode", "core");
  if (mode == "core") {
    b.mode = BiasMode::core;
  } else if (mode == "phi_extension") {
    b.mode = BiasMode::phi_extension;
  } else if (mode == "generalized") {
    b.mode = BiasMode::generalized;
  } else {
    throw Error(ErrorKind::config_invalid, "unknown bias mode '" + mode + "'");
  }
  if (j.contains("q_vec")) {
    b.q = j.at("q_vec").get<std::vector<double>>();
  } else if (j.contains("q")) {
    b.q = {j.at("q").get<double>()};
  }
  detail::read_opt(j, "phi", b.phi);
  detail::read_opt(j, "per_period", b.per_period);
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    if (a.is_number()) {
      b.alpha_scalar = a.get<double>();
    } else {
      const auto rows = a.get<std::vector<std::vector<double>>>();
      b.alpha = Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw Error(ErrorKind::config_invalid, "alpha must be square");
        for (std::size_t k = 0; k < rows.size(); ++k) {
          b.alpha(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
      }
    }
  }
  return b;
}

inline nlohmann::json bias_to_json(const BiasSpec& b) {
  nlohmann::json j;
  j["mode"] = b.mode == BiasMode::core ? "core" : b.mode == BiasMode::phi_extension ? "phi_extension" : "generalized";
  j["phi"] = b.phi;
  j["per_period"] = b.per_period;
  j["alpha"] = b.alpha_scalar;
  return j;
}

inline GeneratorParams generator_from_json(const nlohmann::json& j) {
  GeneratorParams p;
  detail::read_opt(j, "n", p.n);
  detail::read_opt(j, "m0", p.m0);
  detail::read_opt(j, "random_meetings", p.random_meetings);
  detail::read_opt(j, "random_link_prob", p.random_link_prob);
  detail::read_opt(j, "neighbor_meetings", p.neighbor_meetings);
  detail::read_opt(j, "neighbor_link_prob", p.neighbor_link_prob);
  detail::read_opt(j, "max_attempts", p.max_attempts);
  return p;
}

inline nlohmann::json generator_to_json(const GeneratorParams& p) {
  return {{"n", p.n},
          {"m0", p.m0},
          {"random_meetings", p.random_meetings},
          {"random_link_prob", p.random_link_prob},
          {"neighbor_meetings", p.neighbor_meetings},
          {"neighbor_link_prob", p.neighbor_link_prob},
          {"max_attempts", p.max_attempts}};
}

/// Parses a scenario. The experiment kind fixes defaults (uniform_beliefs: U[0,1] beliefs and
/// q ~ U[0.05, 0.15]; discrete_voting: bucket beliefs and q = 0.7); explicit keys override them.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorKind::config_invalid, "scenario must be a JSON object");
    const int version = j.value("schema_version", 0);
    if (version != scenario_schema_version) {
      throw Error(ErrorKind::config_invalid,
                  "unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(scenario_schema_version) + ")");
    }
    ScenarioConfig c;
    const std::string experiment = j.value("experiment", "uniform_beliefs");
    if (experiment == "uniform_beliefs") {
      c.experiment = Experiment::uniform_beliefs;
    } else if (experiment == "discrete_voting") {
      c.experiment = Experiment::discrete_voting;
      c.beliefs = BeliefSource::buckets;
      c.q = QSource{false, 0.7, 0.0, 0.0};
    } else if (experiment == "custom") {
      c.experiment = Experiment::custom;
    } else {
      throw Error(ErrorKind::config_invalid, "unknown experiment '" + experiment + "'");
    }

    if (j.contains("network")) {
      const auto& net = j.at("network");
      if (net.contains("file")) {
        c.network_file = net.at("file").get<std::string>();
        c.generator.reset();
      }
      if (net.contains("generator")) c.generator = generator_from_json(net.at("generator"));
    }
    detail::read_opt(j, "n_networks", c.n_networks);
    detail::read_opt(j, "n_assignments", c.n_assignments);
    if (j.contains("beliefs")) {
      const auto& b = j.at("beliefs");
      const std::string source = b.value("source", "uniform01");
      if (source == "uniform01") {
        c.beliefs = BeliefSource::uniform01;
      } else if (source == "buckets") {
        c.beliefs = BeliefSource::buckets;
        if (b.contains("positions")) c.buckets.positions = b.at("positions").get<std::array<double, 5>>();
        detail::read_opt(b, "f_swing", c.buckets.f_swing);
        detail::read_opt(b, "el_lo", c.buckets.el_lo);
        detail::read_opt(b, "el_hi", c.buckets.el_hi);
        detail::read_opt(b, "left_total", c.buckets.left_total);
        detail::read_opt(b, "cr_lo", c.buckets.cr_lo);
        detail::read_opt(b, "cr_hi", c.buckets.cr_hi);
        detail::read_opt(b, "right_total", c.buckets.right_total);
      } else {
        throw Error(ErrorKind::config_invalid, "unknown belief source '" + source + "'");
      }
    }
    if (j.contains("q")) {
      const auto& q = j.at("q");
      if (q.is_number()) {
        c.q = QSource{false, q.get<double>(), 0.0, 0.0};
      } else {
        const std::string source = q.value("source", "fixed");
        if (source == "fixed") {
          c.q = QSource{false, q.at("value").get<double>(), 0.0, 0.0};
        } else if (source == "uniform") {
          c.q = QSource{true, 0.0, q.at("lo").get<double>(), q.at("hi").get<double>()};
        } else {
          throw Error(ErrorKind::config_invalid, "unknown q source '" + source + "'");
        }
      }
    }
    if (j.contains("bias")) c.bias = bias_from_json(j.at("bias"));
    detail::read_opt(j, "eps", c.eps);
    detail::read_opt(j, "t_max", c.t_max);
    detail::read_opt(j, "election_extra_periods", c.election_extra_periods);
    if (j.contains("swing")) {
      const std::string swing = j.at("swing").get<std::string>();
      if (swing == "coin") {
        c.swing = SwingRule::coin;
      } else if (swing == "left") {
        c.swing = SwingRule::left;
      } else {
        throw Error(ErrorKind::config_invalid, "swing must be 'coin' or 'left'");
      }
    }
    detail::read_opt(j, "master_seed", c.master_seed);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config_invalid, e.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config_invalid, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse_error, path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["schema_version"] = scenario_schema_version;
  j["experiment"] = to_string(c.experiment);
  if (c.generator) j["network"]["generator"] = generator_to_json(*c.generator);
  if (c.network_file) j["network"]["file"] = *c.network_file;
  j["n_networks"] = c.n_networks;
  j["n_assignments"] = c.n_assignments;
  if (c.beliefs == BeliefSource::uniform01) {
    j["beliefs"] = {{"source", "uniform01"}};
  } else {
    const auto& b = c.buckets;
    j["beliefs"] = {{"source", "buckets"}, {"positions", b.positions}, {"f_swing", b.f_swing},
                    {"el_lo", b.el_lo}, {"el_hi", b.el_hi}, {"left_total", b.left_total},
                    {"cr_lo", b.cr_lo}, {"cr_hi", b.cr_hi}, {"right_total", b.right_total}};
  }
  if (c.q.uniform) {
    j["q"] = {{"source", "uniform"}, {"lo", c.q.lo}, {"hi", c.q.hi}};
  } else {
    j["q"] = {{"source", "fixed"}, {"value", c.q.value}};
  }
  j["bias"] = bias_to_json(c.bias);
  j["eps"] = c.eps;
  j["t_max"] = c.t_max;
  j["election_extra_periods"] = c.election_extra_periods;
  j["swing"] = c.swing == SwingRule::coin ? "coin" : "left";
  j["master_seed"] = c.master_seed;
  return j;
}

/// Named presets: set1/set2 at desk scale (n = 200, 100 networks x 20 assignments) or full
/// scale (n = 1000, 1000 x 100).
inline ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  const bool desk = name.ends_with("-desk");
  if (!desk && !name.ends_with("-full")) throw Error(ErrorKind::config_invalid, "unknown preset '" + name + "'");
  const std::string set = name.substr(0, name.find('-'));
  if (set == "set2") {
    c.experiment = Experiment::discrete_voting;
    c.beliefs = BeliefSource::buckets;
    c.q = QSource{false, 0.7, 0.0, 0.0};
  } else if (set != "set1") {
    throw Error(ErrorKind::config_invalid, "unknown preset '" + name + "'");
  }
  if (desk) {
    c.generator->n = 200;
    c.n_networks = 100;
    c.n_assignments = 20;
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Runs

struct ArmRecord {
  std::optional<std::int64_t> convergence_time;
  std::optional<double> consensus;
  std::vector<double> polarization;  ///< t = 0 .. horizon
  ElectionRecord elections;
};

struct RunRecord {
  std::int64_t network_id = 0;
  std::int64_t assignment_id = 0;
  double q = 0.0;
  std::uint64_t network_seed = 0;
  std::uint64_t assignment_seed = 0;
  std::uint64_t tie_seed = 0;
  std::int64_t horizon = 0;
  std::size_t information_loss = 0;
  ArmRecord no_bias;
  ArmRecord bias;
};

namespace detail {

enum SeedPurpose : std::uint64_t { network_stream = 1, beliefs_stream = 2, q_stream = 3, ties_stream = 4 };

/// Convergence time of one arm without stepping past t_max when the limit cannot be reached.
inline std::optional<std::int64_t> arm_convergence(const ListeningNetwork& net, const BeliefState& x0,
                                                   const std::optional<BiasSpec>& spec, double eps,
                                                   std::int64_t t_max) {
  const bool per_period = spec && spec->mode == BiasMode::generalized && spec->per_period;
  if (!per_period) {
    const ListeningNetwork effective = spec ? apply_bias(net, x0, *spec) : net;
    if (belief_spread(x0.beliefs) >= eps) {
      const auto limit = limiting_spread(effective, x0);
      if (limit && *limit >= eps) return std::nullopt;
    }
  }
  return run(net, x0, spec, eps, t_max).belief_convergence_time;
}

inline ArmRecord run_arm(const ListeningNetwork& net, const BeliefState& x0, const std::optional<BiasSpec>& spec,
                         const ScenarioConfig& c, std::optional<std::int64_t> convergence,
                         std::int64_t horizon, std::uint64_t tie_seed) {
  ArmRecord arm;
  arm.convergence_time = convergence;
  const Trajectory traj = run_through(net, x0, spec, c.eps, horizon);
  arm.consensus = traj.consensus_value;
  arm.polarization.reserve(traj.states.size());
  for (const auto& s : traj.states) arm.polarization.push_back(polarization(s));
  arm.elections = detect_shock(traj, tie_seed, c.swing);
  return arm;
}

}  // namespace detail

inline ListeningNetwork scenario_network(const ScenarioConfig& c, std::int64_t network_id) {
  if (c.network_file) return load_network(*c.network_file);
  GeneratorParams p = *c.generator;
  p.seed = derive_seed(c.master_seed, {static_cast<std::uint64_t>(network_id), detail::network_stream});
  return generate_meeting_network(p);
}

/// One paired run: both arms see the same network, the same initial beliefs and the same coin
/// tosses; elections run every period up to the no-bias convergence time plus the configured
/// window, capped at t_max.
inline RunRecord run_unit(const ScenarioConfig& c, const ListeningNetwork& net, std::int64_t network_id,
                          std::int64_t assignment_id) {
  RunRecord r;
  r.network_id = network_id;
  r.assignment_id = assignment_id;
  const auto nid = static_cast<std::uint64_t>(network_id);
  const auto aid = static_cast<std::uint64_t>(assignment_id);
  r.network_seed = c.network_file ? 0 : derive_seed(c.master_seed, {nid, detail::network_stream});
  r.assignment_seed = derive_seed(c.master_seed, {nid, aid, detail::beliefs_stream});
  r.tie_seed = derive_seed(c.master_seed, {nid, aid, detail::ties_stream});

  Engine belief_rng(r.assignment_seed);
  Vector x;
  if (c.beliefs == BeliefSource::uniform01) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    x.resize(static_cast<Eigen::Index>(net.n()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unif(belief_rng);
  } else {
    x = assign_buckets(c.buckets.draw(belief_rng), net.n(), belief_rng);
  }
  const BeliefState x0{0, std::move(x)};
  Engine q_rng(derive_seed(c.master_seed, {nid, aid, detail::q_stream}));
  r.q = c.q.draw(q_rng);
  const BiasSpec spec = c.bias_for(r.q);

  const auto conv_plain = detail::arm_convergence(net, x0, std::nullopt, c.eps, c.t_max);
  const auto conv_bias = detail::arm_convergence(net, x0, spec, c.eps, c.t_max);
  r.horizon = conv_plain ? std::min(*conv_plain + c.election_extra_periods, c.t_max) : c.t_max;
  r.horizon = std::max<std::int64_t>(r.horizon, 1);
  r.no_bias = detail::run_arm(net, x0, std::nullopt, c, conv_plain, r.horizon, r.tie_seed);
  r.bias = detail::run_arm(net, x0, spec, c, conv_bias, r.horizon, r.tie_seed);
  if (!(spec.mode == BiasMode::generalized && spec.per_period)) {
    r.information_loss = information_loss(net, apply_bias(net, x0, spec));
  }
  return r;
}

/// Number of worker threads: BIASLAB_THREADS wins over the requested value; 0 means one per core.
inline unsigned resolve_threads(unsigned requested) {
  if (const char* env = std::getenv("BIASLAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) requested = static_cast<unsigned>(v);
  }
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

/// Runs every (network, assignment) unit. Each unit draws from its own seed substream and
/// the records come back sorted by (network_id, assignment_id), so the output does not depend
/// on the number of threads.
inline std::vector<RunRecord> run_experiment(const ScenarioConfig& c, unsigned threads = 1) {
  c.validate();
  const std::int64_t total = c.n_networks * c.n_assignments;
  std::vector<RunRecord> records(static_cast<std::size_t>(total));
  std::optional<ListeningNetwork> shared;
  if (c.network_file) shared = load_network(*c.network_file);

  std::atomic<std::int64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::int64_t nid = next.fetch_add(1);
      if (nid >= c.n_networks) return;
      try {
        const ListeningNetwork net = shared ? *shared : scenario_network(c, nid);
        for (std::int64_t aid = 0; aid < c.n_assignments; ++aid) {
          records[static_cast<std::size_t>(nid * c.n_assignments + aid)] = run_unit(c, net, nid, aid);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
        next.store(c.n_networks);
        return;
      }
    }
  };
  const unsigned n_threads = static_cast<unsigned>(
      std::min<std::int64_t>(resolve_threads(threads), c.n_networks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

// ---------------------------------------------------------------------------
// Outputs

inline const char* runs_csv_header() {
  return "network_id,assignment_id,q,network_seed,assignment_seed,tie_seed,horizon,"
         "convergence_time_no_bias,convergence_time_bias,consensus_no_bias,consensus_bias,"
         "consensus_delta,information_loss,initial_winner,limiting_winner_no_bias,"
         "limiting_winner_bias,in_scope_no_bias,in_scope_bias,shock_count_no_bias,"
         "shock_count_bias,shock_times_no_bias,shock_times_bias";
}

namespace detail {

template <typename T>
std::string opt_cell(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return format_real(*v);
  } else {
    return std::to_string(*v);
  }
}

inline std::string join_times(const std::vector<std::int64_t>& ts) {
  std::string out;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (k) out += ';';
    out += std::to_string(ts[k]);
  }
  return out;
}

inline std::optional<double> consensus_delta(const RunRecord& r) {
  if (!r.no_bias.consensus || !r.bias.consensus) return std::nullopt;
  return *r.bias.consensus - *r.no_bias.consensus;
}

}  // namespace detail

inline void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << runs_csv_header() << '\n';
  for (const auto& r : records) {
    out << r.network_id << ',' << r.assignment_id << ',' << format_real(r.q) << ',' << r.network_seed << ','
        << r.assignment_seed << ',' << r.tie_seed << ',' << r.horizon << ','
        << detail::opt_cell(r.no_bias.convergence_time) << ',' << detail::opt_cell(r.bias.convergence_time)
        << ',' << detail::opt_cell(r.no_bias.consensus) << ',' << detail::opt_cell(r.bias.consensus) << ','
        << detail::opt_cell(detail::consensus_delta(r)) << ',' << r.information_loss << ','
        << to_string(r.no_bias.elections.initial_winner) << ','
        << to_string(r.no_bias.elections.limiting_winner) << ','
        << to_string(r.bias.elections.limiting_winner) << ',' << (r.no_bias.elections.in_scope ? 1 : 0) << ','
        << (r.bias.elections.in_scope ? 1 : 0) << ',' << r.no_bias.elections.shock_times.size() << ','
        << r.bias.elections.shock_times.size() << ',' << detail::join_times(r.no_bias.elections.shock_times)
        << ',' << detail::join_times(r.bias.elections.shock_times) << '\n';
  }
}

/// Per-period aggregate over the runs whose horizon covers t.
struct PeriodSeries {
  std::vector<double> no_bias;
  std::vector<double> bias;
  std::vector<std::int64_t> runs;
};

inline PeriodSeries mean_polarization(const std::vector<RunRecord>& records) {
  PeriodSeries s;
  for (const auto& r : records) {
    const std::size_t len = r.no_bias.polarization.size();
    if (s.runs.size() < len) {
      s.runs.resize(len, 0);
      s.no_bias.resize(len, 0.0);
      s.bias.resize(len, 0.0);
    }
    for (std::size_t t = 0; t < len; ++t) {
      s.no_bias[t] += r.no_bias.polarization[t];
      s.bias[t] += r.bias.polarization[t];
      ++s.runs[t];
    }
  }
  for (std::size_t t = 0; t < s.runs.size(); ++t) {
    s.no_bias[t] /= static_cast<double>(s.runs[t]);
    s.bias[t] /= static_cast<double>(s.runs[t]);
  }
  return s;
}

inline PeriodSeries shock_fractions(const std::vector<RunRecord>& records) {
  PeriodSeries s;
  auto add = [](std::vector<double>& v, const std::vector<std::int64_t>& times) {
    for (std::int64_t t : times) v[static_cast<std::size_t>(t)] += 1.0;
  };
  for (const auto& r : records) {
    const auto len = static_cast<std::size_t>(r.horizon + 1);
    if (s.runs.size() < len) {
      s.runs.resize(len, 0);
      s.no_bias.resize(len, 0.0);
      s.bias.resize(len, 0.0);
    }
    for (std::size_t t = 0; t < len; ++t) ++s.runs[t];
    add(s.no_bias, r.no_bias.elections.shock_times);
    add(s.bias, r.bias.elections.shock_times);
  }
  for (std::size_t t = 0; t < s.runs.size(); ++t) {
    s.no_bias[t] /= static_cast<double>(s.runs[t]);
    s.bias[t] /= static_cast<double>(s.runs[t]);
  }
  return s;
}

inline void write_series_csv(std::ostream& out, const PeriodSeries& s, const char* value_column) {
  out << "t,arm," << value_column << ",runs\n";
  for (std::size_t t = 0; t < s.runs.size(); ++t) {
    out << t << ",no_bias," << format_real(s.no_bias[t]) << ',' << s.runs[t] << '\n';
    out << t << ",bias," << format_real(s.bias[t]) << ',' << s.runs[t] << '\n';
  }
}

struct PairedTest {
  std::int64_t pairs = 0;
  double mean_difference = 0.0;
  double t_statistic = 0.0;
  /// Two-sided p-value.
  double p_value = 1.0;
};

/// Paired t-test on (a_k - b_k).
inline PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  require_same_size(a.size(), b.size(), "paired_t_test");
  PairedTest out;
  out.pairs = static_cast<std::int64_t>(a.size());
  if (a.size() < 2) return out;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] - b[k];
  const double n = static_cast<double>(a.size());
  out.mean_difference = sum / n;
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k] - out.mean_difference;
    ss += d * d;
  }
  const double se = std::sqrt(ss / (n - 1.0) / n);
  if (se == 0.0) {
    out.t_statistic = out.mean_difference == 0.0 ? 0.0 : std::copysign(INFINITY, out.mean_difference);
    out.p_value = out.mean_difference == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.t_statistic = out.mean_difference / se;
  const boost::math::students_t dist(n - 1.0);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t_statistic)));
  return out;
}

/// Summary of a sweep. Every field is a fold over the records in (network_id, assignment_id)
/// order, so it can be recomputed from runs.csv and the two series files.
inline nlohmann::json summarize(const ScenarioConfig& c, const std::vector<RunRecord>& records) {
  nlohmann::json j;
  j["schema_version"] = scenario_schema_version;
  j["config"] = scenario_to_json(c);
  j["runs"] = records.size();

  auto arm_stats = [&](auto pick) {
    std::map<std::int64_t, std::int64_t> histogram;
    std::int64_t converged = 0, sum = 0;
    std::int64_t lo = 0, hi = 0;
    for (const auto& r : records) {
      const auto& t = pick(r).convergence_time;
      if (!t) continue;
      if (converged == 0 || *t < lo) lo = *t;
      if (converged == 0 || *t > hi) hi = *t;
      ++converged;
      sum += *t;
      ++histogram[*t];
    }
    nlohmann::json a;
    a["converged"] = converged;
    a["unconverged"] = static_cast<std::int64_t>(records.size()) - converged;
    a["mean"] = converged ? static_cast<double>(sum) / static_cast<double>(converged) : 0.0;
    a["min"] = lo;
    a["max"] = hi;
    nlohmann::json h = nlohmann::json::object();
    for (auto [t, count] : histogram) h[std::to_string(t)] = count;
    a["histogram"] = h;
    std::int64_t shocks = 0, in_scope = 0, latest = -1;
    for (const auto& r : records) {
      const auto& e = pick(r).elections;
      shocks += static_cast<std::int64_t>(e.shock_times.size());
      in_scope += e.in_scope ? 1 : 0;
      if (!e.shock_times.empty()) latest = std::max(latest, e.shock_times.back());
    }
    a["shock_elections"] = shocks;
    a["in_scope_runs"] = in_scope;
    a["latest_shock"] = latest;
    return a;
  };
  j["no_bias"] = arm_stats([](const RunRecord& r) -> const ArmRecord& { return r.no_bias; });
  j["bias"] = arm_stats([](const RunRecord& r) -> const ArmRecord& { return r.bias; });

  std::int64_t faster = 0;
  std::vector<double> with_bias, without_bias;
  double delta_sum = 0.0;
  std::int64_t delta_count = 0;
  for (const auto& r : records) {
    const auto& a = r.no_bias.convergence_time;
    const auto& b = r.bias.convergence_time;
    if (a && b) {
      if (*b < *a) ++faster;
      with_bias.push_back(static_cast<double>(*b));
      without_bias.push_back(static_cast<double>(*a));
    }
    if (const auto d = detail::consensus_delta(r)) {
      delta_sum += *d;
      ++delta_count;
    }
  }
  j["bias_faster_fraction"] = records.empty() ? 0.0 : static_cast<double>(faster) / static_cast<double>(records.size());
  const PairedTest test = paired_t_test(with_bias, without_bias);
  j["paired_test"] = {{"pairs", test.pairs},
                      {"mean_difference", test.mean_difference},
                      {"t_statistic", test.t_statistic},
                      {"p_value", test.p_value}};
  j["mean_consensus_delta"] = delta_count ? delta_sum / static_cast<double>(delta_count) : 0.0;
  const PeriodSeries pol = mean_polarization(records);
  const PeriodSeries shocks = shock_fractions(records);
  j["polarization"] = {{"no_bias", pol.no_bias}, {"bias", pol.bias}};
  j["shock_fraction"] = {{"no_bias", shocks.no_bias}, {"bias", shocks.bias}};
  return j;
}

/// Writes runs.csv, polarization.csv, shocks.csv and summary.json into `dir`.
inline nlohmann::json write_outputs(const std::filesystem::path& dir, const ScenarioConfig& c,
                                    const std::vector<RunRecord>& records) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "runs.csv");
    write_runs_csv(out, records);
  }
  {
    std::ofstream out(dir / "polarization.csv");
    write_series_csv(out, mean_polarization(records), "mean_var");
  }
  {
    std::ofstream out(dir / "shocks.csv");
    write_series_csv(out, shock_fractions(records), "shock_fraction");
  }
  nlohmann::json summary = summarize(c, records);
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
  return summary;
}

}  // namespace biaslab

#endif  // BIASLAB_SIMLAB_HPP
