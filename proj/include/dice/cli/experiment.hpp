#pragma once

// Experiment description and the flat key=value config file.
//
//   # comment
//   env = deceptive-chain-10
//   seeds = 1,2,3
//   total_steps = 2000
//   ablation = no_bva
//
// Keys not listed in apply_config_entry are rejected.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "dice/errors.hpp"
#include "dice/runtime/config.hpp"

namespace dice::cli {

inline const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names = {"no_bva",    "baseline",  "no_drtrace",
                                                 "no_stop_pi", "no_stop_v", "random_scaling"};
  return names;
}

struct ExperimentSpec {
  std::string config_path;
  std::string environment = "chain-10";
  RunConfig config = [] {
    RunConfig c;
    c.sync = false;
    return c;
  }();
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "dice_out";
  bool plot = false;
  std::vector<std::string> ablations;

  void validate() const {
    if (seeds.empty()) throw InvalidConfig("at least one seed is required");
    if (config.eval_interval < 1) throw InvalidConfig("eval_interval must be >= 1");
    config.validate();
  }
};

inline void apply_ablation(RunConfig& cfg, const std::string& name) {
  if (name == "no_bva") {
    cfg.flags.no_bva = true;
  } else if (name == "baseline") {
    cfg.baseline = true;
  } else if (name == "no_drtrace") {
    cfg.flags.no_drtrace = true;
  } else if (name == "no_stop_pi") {
    cfg.flags.no_stop_pi = true;
  } else if (name == "no_stop_v") {
    cfg.flags.no_stop_v = true;
  } else if (name == "random_scaling") {
    cfg.flags.random_scaling = true;
  } else {
    throw InvalidConfig("unknown ablation '" + name + "'");
  }
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) throw ParseError("config: bad value for '" + key + "': " + value);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError("config: bad boolean for '" + key + "': " + value);
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split_list(value)) seeds.push_back(parse_number<std::uint64_t>("seeds", item));
  if (seeds.empty()) throw ParseError("config: empty seed list");
  return seeds;
}

}  // namespace detail

inline void apply_config_entry(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_number;
  RunConfig& c = spec.config;
  if (key == "env") spec.environment = value;
  else if (key == "seeds") spec.seeds = detail::parse_seeds(value);
  else if (key == "out") spec.out_dir = value;
  else if (key == "plot") spec.plot = parse_bool(key, value);
  else if (key == "ablation") {
    for (const auto& name : detail::split_list(value)) spec.ablations.push_back(name);
  }
  else if (key == "gamma") c.gamma = parse_number<double>(key, value);
  else if (key == "xi") c.xi = parse_number<double>(key, value);
  else if (key == "alpha") c.alpha = parse_number<double>(key, value);
  else if (key == "beta") c.beta = parse_number<double>(key, value);
  else if (key == "c_bar") c.c_bar = parse_number<double>(key, value);
  else if (key == "rho_bar") c.rho_bar = parse_number<double>(key, value);
  else if (key == "d_push") c.d_push = parse_number<int>(key, value);
  else if (key == "d_pull") c.d_pull = parse_number<int>(key, value);
  else if (key == "num_actors") c.num_actors = parse_number<int>(key, value);
  else if (key == "batch_size") c.batch_size = parse_number<int>(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
  else if (key == "total_steps") c.total_steps = parse_number<long>(key, value);
  else if (key == "sample_reuse") c.sample_reuse = parse_number<int>(key, value);
  else if (key == "queue_capacity") c.queue_capacity = parse_number<int>(key, value);
  else if (key == "eval_interval") c.eval_interval = parse_number<long>(key, value);
  else if (key == "eval_episodes") c.eval_episodes = parse_number<int>(key, value);
  else if (key == "max_episode_steps") c.max_episode_steps = parse_number<int>(key, value);
  else if (key == "sync") c.sync = parse_bool(key, value);
  else if (key == "estimator") {
    if (value == "drtrace") c.estimator = Estimator::drtrace;
    else if (value == "vtrace+retrace") c.estimator = Estimator::vtrace_retrace;
    else throw ParseError("config: estimator must be drtrace or vtrace+retrace");
  }
  else if (key == "bandit_members") c.bandit.members = parse_number<int>(key, value);
  else if (key == "bandit_d") c.bandit.d = parse_number<int>(key, value);
  else if (key == "bandit_ucb_scale") c.bandit.ucb_scale = parse_number<double>(key, value);
  else if (key == "bandit_tiles") c.bandit.domain.tiles = parse_number<int>(key, value);
  else throw ParseError("config: unknown key '" + key + "'");
}

inline void load_config(std::istream& in, ExperimentSpec& spec) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    apply_config_entry(spec, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(const std::string& path, ExperimentSpec& spec) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open config file '" + path + "'");
  load_config(in, spec);
}

}  // namespace dice::cli
