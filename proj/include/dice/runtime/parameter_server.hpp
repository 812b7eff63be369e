#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <utility>

#include "dice/errors.hpp"
#include "dice/tables.hpp"

namespace dice {

/// The learner's parameters: advantage table A(s,a), value table V(s) and a version.
struct AgentParams {
  StateActionTable advantages;
  StateTable values;
  std::uint64_t version = 0;

  static AgentParams zeros(int states, int actions) {
    return {StateActionTable::Zero(states, actions), StateTable::Zero(states), 0};
  }
};

/// Holds the latest published parameters. Snapshots share an immutable copy, so a
/// reader never sees a half-written table.
class ParameterServer {
 public:
  explicit ParameterServer(AgentParams initial)
      : current_(std::make_shared<const AgentParams>(std::move(initial))) {}

  void publish(AgentParams params) {
    auto next = std::make_shared<const AgentParams>(std::move(params));
    std::lock_guard lock(mu_);
    if (next->version <= current_->version) {
      throw InvalidArgument("parameter server: published version must increase");
    }
    current_ = std::move(next);
  }

  std::shared_ptr<const AgentParams> snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  std::uint64_t version() const { return snapshot()->version; }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const AgentParams> current_;
};

}  // namespace dice
