#pragma once

// Built-in tabular environments and the plain-text MDP definition format.
//
//   chain-N            N states in a row, start at 0. Action 0 moves left (stays at 0),
//                      action 1 moves right. State N-1 is terminal; entering it pays 1.
//   gridworld-RxC      R rows by C columns, state = row*C + col, start at 0 (top-left).
//                      Actions up, down, left, right; bumping a wall stays put. The
//                      bottom-right cell is terminal; entering it pays 1.
//   deceptive-chain-N  N chain states plus one terminal state N. In chain state s,
//                      action 0 quits to the terminal for an immediate 1; action 1
//                      advances to s+1 for 0, except from N-1 where it reaches the
//                      terminal for 10.
//
// MDP file format (one directive per line, '#' starts a comment):
//   states S
//   actions A
//   gamma G
//   terminals s1 s2 ...        (optional)
//   initial s p                (repeatable; default: all mass on state 0)
//   p s a s' prob              (transition; rows for terminal states are implied)
//   r s a value                (reward; default 0)

#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "dice/errors.hpp"
#include "dice/mdp.hpp"

namespace dice {

inline constexpr double kBuiltinGamma = 0.997;

inline TabularMdp make_chain(int n, double gamma = kBuiltinGamma) {
  if (n < 2) throw InvalidArgument("chain: need at least 2 states");
  TabularMdp mdp("chain-" + std::to_string(n), n, 2, gamma);
  for (int s = 0; s < n; ++s) {
    mdp.p(s, 0, std::max(0, s - 1)) = 1.0;
    mdp.p(s, 1, s + 1 < n ? s + 1 : s) = 1.0;
  }
  mdp.rewards(n - 2, 1) = 1.0;
  mdp.make_terminal(n - 1);
  mdp.initial[0] = 1.0;
  return mdp;
}

inline TabularMdp make_gridworld(int rows, int cols, double gamma = kBuiltinGamma) {
  if (rows < 1 || cols < 1 || rows * cols < 2) throw InvalidArgument("gridworld: need at least 2 cells");
  const int n = rows * cols;
  TabularMdp mdp("gridworld-" + std::to_string(rows) + "x" + std::to_string(cols), n, 4, gamma);
  const int goal = n - 1;
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  for (int s = 0; s < n; ++s) {
    const int r = s / cols;
    const int c = s % cols;
    for (int a = 0; a < 4; ++a) {
      const int nr = r + dr[a];
      const int nc = c + dc[a];
      const bool inside = nr >= 0 && nr < rows && nc >= 0 && nc < cols;
      const int next = inside ? nr * cols + nc : s;
      mdp.p(s, a, next) = 1.0;
      if (next == goal && s != goal) mdp.rewards(s, a) = 1.0;
    }
  }
  mdp.make_terminal(goal);
  mdp.initial[0] = 1.0;
  return mdp;
}

inline TabularMdp make_deceptive_chain(int n, double gamma = kBuiltinGamma, double bail_reward = 1.0,
                                       double goal_reward = 10.0) {
  if (n < 1) throw InvalidArgument("deceptive-chain: need at least 1 chain state");
  TabularMdp mdp("deceptive-chain-" + std::to_string(n), n + 1, 2, gamma);
  const int end = n;
  for (int s = 0; s < n; ++s) {
    mdp.p(s, 0, end) = 1.0;
    mdp.rewards(s, 0) = bail_reward;
    mdp.p(s, 1, s + 1) = 1.0;
  }
  mdp.rewards(n - 1, 1) = goal_reward;
  mdp.make_terminal(end);
  mdp.initial[0] = 1.0;
  return mdp;
}

namespace detail {

inline int parse_int(const std::string& tok, int line) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("line " + std::to_string(line) + ": expected an integer, got '" + tok + "'");
  }
  return value;
}

inline double parse_real(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    const double value = std::stod(tok, &used);
    if (used == tok.size()) return value;
  } catch (const std::exception&) {
  }
  throw ParseError("line " + std::to_string(line) + ": expected a number, got '" + tok + "'");
}

}  // namespace detail

inline TabularMdp parse_mdp(std::istream& in, const std::string& name = "file") {
  int states = -1;
  int actions = -1;
  double gamma = kBuiltinGamma;
  std::vector<int> terminals;
  std::vector<std::pair<int, double>> initial;
  struct Entry {
    int s, a, n;
    double value;
    int line;
  };
  std::vector<Entry> probs;
  std::vector<Entry> rewards;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    auto want = [&](std::size_t n) {
      if (tok.size() != n) throw ParseError("line " + std::to_string(line_no) + ": malformed '" + key + "'");
    };
    if (key == "states") {
      want(2);
      states = detail::parse_int(tok[1], line_no);
    } else if (key == "actions") {
      want(2);
      actions = detail::parse_int(tok[1], line_no);
    } else if (key == "gamma") {
      want(2);
      gamma = detail::parse_real(tok[1], line_no);
    } else if (key == "terminals") {
      for (std::size_t i = 1; i < tok.size(); ++i) terminals.push_back(detail::parse_int(tok[i], line_no));
    } else if (key == "initial") {
      want(3);
      initial.emplace_back(detail::parse_int(tok[1], line_no), detail::parse_real(tok[2], line_no));
    } else if (key == "p") {
      want(5);
      probs.push_back({detail::parse_int(tok[1], line_no), detail::parse_int(tok[2], line_no),
                       detail::parse_int(tok[3], line_no), detail::parse_real(tok[4], line_no), line_no});
    } else if (key == "r") {
      want(4);
      rewards.push_back({detail::parse_int(tok[1], line_no), detail::parse_int(tok[2], line_no), 0,
                         detail::parse_real(tok[3], line_no), line_no});
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown directive '" + key + "'");
    }
  }
  if (states < 1 || actions < 1) throw ParseError("mdp file must declare positive 'states' and 'actions'");

  TabularMdp mdp(name, states, actions, gamma);
  auto check_state = [&](int s, int line) {
    if (s < 0 || s >= states) throw ParseError("line " + std::to_string(line) + ": state out of range");
  };
  auto check_action = [&](int a, int line) {
    if (a < 0 || a >= actions) throw ParseError("line " + std::to_string(line) + ": action out of range");
  };
  for (const auto& e : probs) {
    check_state(e.s, e.line);
    check_action(e.a, e.line);
    check_state(e.n, e.line);
    mdp.p(e.s, e.a, e.n) += e.value;
  }
  for (const auto& e : rewards) {
    check_state(e.s, e.line);
    check_action(e.a, e.line);
    mdp.rewards(e.s, e.a) = e.value;
  }
  for (int s : terminals) {
    check_state(s, line_no);
    mdp.make_terminal(s);
  }
  if (initial.empty()) {
    mdp.initial[0] = 1.0;
  } else {
    for (const auto& [s, p] : initial) {
      check_state(s, line_no);
      mdp.initial[s] += p;
    }
  }
  mdp.validate();
  return mdp;
}

inline TabularMdp load_mdp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open mdp file '" + path + "'");
  return parse_mdp(in, path);
}

inline void write_mdp(std::ostream& out, const TabularMdp& mdp) {
  out.precision(17);
  out << "states " << mdp.num_states << "\nactions " << mdp.num_actions << "\ngamma " << mdp.gamma << "\n";
  bool any_terminal = false;
  for (int s = 0; s < mdp.num_states; ++s) any_terminal = any_terminal || mdp.is_terminal(s);
  if (any_terminal) {
    out << "terminals";
    for (int s = 0; s < mdp.num_states; ++s) {
      if (mdp.is_terminal(s)) out << ' ' << s;
    }
    out << "\n";
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.initial[s] > 0.0) out << "initial " << s << ' ' << mdp.initial[s] << "\n";
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < mdp.num_actions; ++a) {
      for (int n = 0; n < mdp.num_states; ++n) {
        if (mdp.p(s, a, n) > 0.0) out << "p " << s << ' ' << a << ' ' << n << ' ' << mdp.p(s, a, n) << "\n";
      }
      if (mdp.rewards(s, a) != 0.0) out << "r " << s << ' ' << a << ' ' << mdp.rewards(s, a) << "\n";
    }
  }
}

/// Resolves a built-in name (chain-N, gridworld-RxC, deceptive-chain-N) or a path
/// to an MDP definition file.
inline TabularMdp make_environment(const std::string& name) {
  static const std::regex chain(R"(chain-(\d+))");
  static const std::regex grid(R"(gridworld-(\d+)x(\d+))");
  static const std::regex deceptive(R"(deceptive-chain-(\d+))");
  std::smatch m;
  if (std::regex_match(name, m, deceptive)) return make_deceptive_chain(std::stoi(m[1]));
  if (std::regex_match(name, m, chain)) return make_chain(std::stoi(m[1]));
  if (std::regex_match(name, m, grid)) return make_gridworld(std::stoi(m[1]), std::stoi(m[2]));
  if (std::ifstream(name).good()) return load_mdp_file(name);
  throw NotFound("unknown environment '" + name + "'");
}

}  // namespace dice
