#pragma once

// Checkpoint text format:
//   dice-checkpoint 1
//   params <S> <A> <version>
//   A <S*A reals, row-major>
//   V <S reals>
//   rngs <count>
//   rng <name> <engine state on one line>     (count lines)
//   ensemble none | ensemble present
//   <bandit ensemble snapshot>                 (when present)
// Reals are written with 17 significant digits so a round trip is exact.

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dice/bandit.hpp"
#include "dice/errors.hpp"
#include "dice/runtime/parameter_server.hpp"
#include "dice/tables.hpp"

namespace dice {

struct Checkpoint {
  AgentParams params;
  std::vector<std::pair<std::string, std::string>> rng_states;
  std::optional<BanditEnsemble> ensemble;
};

inline std::string rng_state(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

inline Rng rng_from_state(const std::string& state) {
  std::istringstream in(state);
  Rng rng;
  if (!(in >> rng)) throw ParseError("checkpoint: bad rng state");
  return rng;
}

inline void write_checkpoint(std::ostream& out, const Checkpoint& cp) {
  const auto old = out.precision(17);
  const auto& p = cp.params;
  out << "dice-checkpoint 1\nparams " << p.advantages.rows() << ' ' << p.advantages.cols() << ' ' << p.version
      << "\nA";
  for (Eigen::Index s = 0; s < p.advantages.rows(); ++s) {
    for (Eigen::Index a = 0; a < p.advantages.cols(); ++a) out << ' ' << p.advantages(s, a);
  }
  out << "\nV";
  for (Eigen::Index s = 0; s < p.values.size(); ++s) out << ' ' << p.values(s);
  out << "\nrngs " << cp.rng_states.size() << "\n";
  for (const auto& [name, state] : cp.rng_states) out << "rng " << name << ' ' << state << "\n";
  if (cp.ensemble) {
    out << "ensemble present\n";
    write_ensemble(out, *cp.ensemble);
  } else {
    out << "ensemble none\n";
  }
  out.precision(old);
}

inline Checkpoint read_checkpoint(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) throw ParseError("checkpoint: expected '" + word + "'");
  };
  expect("dice-checkpoint");
  int version = 0;
  if (!(in >> version) || version != 1) throw ParseError("checkpoint: unsupported version");
  Checkpoint cp;
  Eigen::Index states = 0, actions = 0;
  expect("params");
  if (!(in >> states >> actions >> cp.params.version) || states < 1 || actions < 1) {
    throw ParseError("checkpoint: bad params header");
  }
  cp.params = AgentParams{StateActionTable(states, actions), StateTable(states), cp.params.version};
  expect("A");
  for (Eigen::Index s = 0; s < states; ++s) {
    for (Eigen::Index a = 0; a < actions; ++a) {
      if (!(in >> cp.params.advantages(s, a))) throw ParseError("checkpoint: bad advantage entry");
    }
  }
  expect("V");
  for (Eigen::Index s = 0; s < states; ++s) {
    if (!(in >> cp.params.values(s))) throw ParseError("checkpoint: bad value entry");
  }
  std::size_t count = 0;
  expect("rngs");
  if (!(in >> count)) throw ParseError("checkpoint: bad rng count");
  for (std::size_t i = 0; i < count; ++i) {
    expect("rng");
    std::string name, state;
    if (!(in >> name) || !std::getline(in, state)) throw ParseError("checkpoint: bad rng line");
    if (!state.empty() && state.front() == ' ') state.erase(0, 1);
    rng_from_state(state);
    cp.rng_states.emplace_back(name, state);
  }
  expect("ensemble");
  std::string presence;
  if (!(in >> presence)) throw ParseError("checkpoint: bad ensemble marker");
  if (presence == "present") {
    cp.ensemble = read_ensemble(in);
  } else if (presence != "none") {
    throw ParseError("checkpoint: bad ensemble marker");
  }
  return cp;
}

}  // namespace dice
