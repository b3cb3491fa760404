#pragma once

#include <string>
#include <vector>

#include "fcmdp/encoder.hpp"
#include "fcmdp/env.hpp"
#include "fcmdp/ir_policy.hpp"
#include "fcmdp/ppo.hpp"

namespace fcmdp {

struct DeployConfig {
  double delta = 0.5;  // uncertainty threshold; IR acts while u < delta
  int n = 5;           // ensemble sample count
  int max_steps = 90;
  bool greedy_ir = true;
  /// Alg. 2 literal behavior: condition IR on one of the n sampled contexts
  /// instead of the deterministic member aggregate.
  bool pooled_sampling = false;
  bool stochastic_encoder_sampling = false;
};

/// Source of IS actions at deployment; lets the trained policy and the
/// random-walk baseline share the episode loop.
class IsActor {
 public:
  virtual ~IsActor() = default;
  virtual int act(const IsObservation& obs, RngStream& rng) = 0;
  virtual void begin_episode() {}
};

class PolicyIsActor final : public IsActor {
 public:
  explicit PolicyIsActor(const ActorCritic& ac, bool greedy = false)
      : ac_(&ac), greedy_(greedy) {}
  int act(const IsObservation& obs, RngStream& rng) override;

 private:
  const ActorCritic* ac_;
  bool greedy_;
};

/// Weighted random walk: repeats the previous action with probability
/// 0.5 + 1/n_actions, otherwise uniform over the remaining actions.
int random_cam_policy(int last_action, int n_actions, RngStream& rng);

class RandomCamActor final : public IsActor {
 public:
  explicit RandomCamActor(int n_actions) : n_actions_(n_actions) {}
  int act(const IsObservation& obs, RngStream& rng) override;
  void begin_episode() override { last_ = -1; }

 private:
  int n_actions_;
  int last_ = -1;
};

/// Mean KL over all ordered pairs i != j; zero when all members agree.
double pairwise_kl(const std::vector<ActionDistribution>& dists);

/// Samples n contexts from the ensemble, conditions the IR policy on each,
/// and returns the mean pairwise KL of the induced action distributions.
double uncertainty(const EncoderEnsemble& ensemble, const IrPolicy& ir,
                   const Eigen::VectorXd& is_flat, const Eigen::VectorXd& ir_flat,
                   int n, RngStream& rng, bool stochastic = false);

enum class Outcome { kSuccess, kStageFail, kTimeout };

struct SwitchEvent {
  int t = 0;
  bool to_ir = false;
  double uncertainty = 0.0;
};

struct EpisodeTrace {
  std::string task;
  std::string method;
  std::uint64_t seed = 0;
  int episode_index = 0;
  int n_stages = 0;
  std::vector<StepRecord> steps;
  std::vector<double> uncertainties;  // one per step; NaN where not computed
  std::vector<SwitchEvent> switches;
  Outcome outcome = Outcome::kTimeout;
  int fail_stage = -1;
  std::vector<bool> stage_reached;
  std::vector<bool> stage_succeeded;
  std::vector<bool> cue_exposed;       // per stage, any time during the episode
  std::vector<int> last_ir_ctx_value;  // per stage; -1 when IR never acted there
  std::vector<bool> ir_attempted;      // per stage
  int gt_combo = -1;
  std::vector<int> gt_values;
  double total_reward = 0.0;

  bool success() const { return outcome == Outcome::kSuccess; }
  int ir_step_count() const;
  int is_step_count() const;
};

/// Alg. 2 deployment loop: every step re-encodes the current IS observation,
/// gates on pairwise-KL uncertainty, and never reads the ground-truth context
/// on the control path.
EpisodeTrace run_episode(FcmdpEnv& env, IsActor& is_actor, const IrPolicy& ir,
                         const EncoderEnsemble& ensemble, const DeployConfig& cfg,
                         std::uint64_t seed);

/// Threshold fit for action spaces where the KL scale differs from the
/// skill-based default: 95th percentile of the uncertainty measured at
/// cue-visible states along IS-only rollouts of the trained policy.
double calibrate_delta(FcmdpEnv& env, const ActorCritic& is_policy, const IrPolicy& ir,
                       const EncoderEnsemble& ensemble, int episodes,
                       std::uint64_t seed, int n_samples = 5);

}  // namespace fcmdp
