#pragma once

#include <functional>
#include <vector>

#include "fcmdp/encoder.hpp"
#include "fcmdp/env.hpp"
#include "fcmdp/ir_policy.hpp"
#include "fcmdp/ppo.hpp"

namespace fcmdp {

enum class RewardSource { kIntrinsic, kTaskReward };

struct TrainConfig {
  PpoConfig ppo;
  int iterations = 200;      // outer loop K
  int rollout_steps = 2048;  // K_pi
  int encoder_updates = 50;  // K_enc
  int encoder_batch = 128;
  double encoder_lr = 1e-3;
  std::size_t replay_capacity = 50000;
  int ensemble_k = 5;
  int mdn_components = 5;
  double switch_threshold = 0.3;  // T: IR acts while loss < T
  double alpha = 1.0;
  double beta = 1.0;
  double reward_floor = -1.0;
  int loss_mc_samples = 16;  // m for continuous IR heads
  std::vector<int> hidden = {64, 64};
  /// Optional per-iteration deployment evaluation; NaN logged when absent.
  std::function<double(const ActorCritic&, const EncoderEnsemble&)> eval_hook;
  /// Invoked every checkpoint_every iterations (and on the last one).
  int checkpoint_every = 0;
  std::function<void(int, const ActorCritic&, const EncoderEnsemble&)> checkpoint_hook;
};

/// Divergence between the IR action distributions under the encoded and the
/// ground-truth context. Discrete heads: cross-entropy with the ground-truth
/// distribution as target; continuous heads: mean NLL under the ground-truth
/// distribution of mc_samples actions drawn from the encoded-context one.
double loss_func(const IrPolicy& ir, const Eigen::VectorXd& o_ir_flat,
                 const ContextVector& c_is, const ContextVector& c_gt,
                 int mc_samples = 16, RngStream* rng = nullptr);

/// r = max(alpha - beta * loss, floor).
double intrinsic_reward(double loss, double alpha = 1.0, double beta = 1.0,
                        double floor = -1.0);

struct TrainLogRow {
  int iteration = 0;
  double mean_reward = 0.0;
  double encoder_loss = 0.0;
  double eval_success = 0.0;
  double wall_time = 0.0;
};

/// Instrumentation consumed by the training-fidelity test suite.
struct TrainTrace {
  std::vector<double> is_rewards;
  std::vector<std::size_t> replay_sizes;  // after each IS transition
  std::vector<double> ir_gate_losses;     // evaluated immediately before each IR step
  struct PhaseMark {
    char phase;  // 'C' after collect, 'P' after PPO, 'E' after encoder updates
    std::uint64_t actor = 0;
    std::uint64_t critic = 0;
    std::uint64_t ensemble = 0;
  };
  std::vector<PhaseMark> phases;
};

/// Rolling state threaded through collect_rollout calls.
struct CollectState {
  RolloutBuffer buffer;
  EncoderReplay replay;
  RngStream rollout_rng;
  bool episode_live = false;

  CollectState(std::size_t replay_capacity, RngStream rng)
      : replay(replay_capacity), rollout_rng(rng) {}
};

/// One IS step: act, reward from the designated (first) ensemble member's
/// encoding of the post-step observation, then hand control to IR while the
/// loss stays below the switch threshold. Episode resets are transparent.
void collect_rollout(FcmdpEnv& env, const ActorCritic& is_policy, const IrPolicy& ir,
                     const EncoderEnsemble& ensemble, const TrainConfig& cfg,
                     RewardSource source, CollectState& state,
                     TrainTrace* trace = nullptr);

struct TrainResult {
  ActorCritic is_policy{Mlp{}, Mlp{}};
  EncoderEnsemble ensemble;
  std::vector<TrainLogRow> log;
};

/// Iterative optimization: K_pi rollout collections, one PPO update, K_enc
/// encoder updates per outer iteration, in strict alternation.
TrainResult train_is(FcmdpEnv& env, const IrPolicy& ir, const TrainConfig& cfg,
                     std::uint64_t seed, RewardSource source = RewardSource::kIntrinsic,
                     TrainTrace* trace = nullptr);

void write_training_log_csv(const std::string& path,
                            const std::vector<TrainLogRow>& log);

}  // namespace fcmdp
