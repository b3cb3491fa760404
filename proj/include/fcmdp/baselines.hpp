#pragma once

#include "fcmdp/deployer.hpp"
#include "fcmdp/is_trainer.hpp"

namespace fcmdp {

/// Ablation: identical loop to train_is, but the stored IS reward is the sum
/// of environment rewards accrued during the IR phase each IS step triggers.
TrainResult train_disam_task_reward(FcmdpEnv& env, const IrPolicy& ir,
                                    const TrainConfig& cfg, std::uint64_t seed,
                                    TrainTrace* trace = nullptr);

/// Single policy over the combined action space, trained with PPO on the
/// stage rewards; no behavior cloning and no encoder.
struct JointPolicy {
  ActorCritic ac{Mlp{}, Mlp{}};
  int n_is_actions = 0;
  int n_ir_skills = 0;
  int is_dim = 0;
  int ir_dim = 0;

  Eigen::VectorXd joint_obs(const FcmdpEnv& env) const;

  void save(const std::string& path) const;
  static JointPolicy load(const std::string& path);
};

struct FullRlConfig {
  PpoConfig ppo;
  int iterations = 200;
  int rollout_steps = 2048;
  std::vector<int> hidden = {64, 64};
};

JointPolicy train_full_rl(FcmdpEnv& env, const FullRlConfig& cfg, std::uint64_t seed);

EpisodeTrace run_full_rl_episode(FcmdpEnv& env, const JointPolicy& policy,
                                 std::uint64_t seed, bool greedy = true);

/// Context drawn uniformly from the context set at reset; IR runs alone.
EpisodeTrace run_sampled_context(FcmdpEnv& env, const IrPolicy& ir, std::uint64_t seed,
                                 bool greedy = true);

}  // namespace fcmdp
