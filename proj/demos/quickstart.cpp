#include <cstdio>
#include <string>

#include "dice/dice.hpp"

int main(int argc, char** argv) {
  const std::string name = argc > 1 ? argv[1] : "deceptive-chain-10";
  const dice::TabularMdp env = dice::make_environment(name);

  dice::RunConfig cfg;
  cfg.total_steps = 600;
  cfg.eval_interval = 100;
  cfg.max_episode_steps = 60;
  cfg.seed = 7;

  const auto report = dice::run_training(env, cfg);
  const auto best = dice::optimal_values(env);
  double start_value = 0.0;
  for (int s = 0; s < env.num_states; ++s) start_value += env.initial[s] * best.v(s);
  std::printf("%s: optimal start value %.3f\n", env.name.c_str(), start_value);
  std::printf("%6s %10s %10s %10s\n", "step", "return", "entropy", "tau_p50");
  for (const auto& p : report.points) {
    std::printf("%6ld %10.3f %10.3f %10.3f\n", p.step, p.mean_return, p.entropy, p.tau_p50);
  }
  std::printf("%llu episodes, %llu environment steps\n", static_cast<unsigned long long>(report.episodes),
              static_cast<unsigned long long>(report.env_steps));
}
