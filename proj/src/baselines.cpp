#include "fcmdp/baselines.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "fcmdp/checkpoint.hpp"

namespace fcmdp {

TrainResult train_disam_task_reward(FcmdpEnv& env, const IrPolicy& ir,
                                    const TrainConfig& cfg, std::uint64_t seed,
                                    TrainTrace* trace) {
  return train_is(env, ir, cfg, seed, RewardSource::kTaskReward, trace);
}

Eigen::VectorXd JointPolicy::joint_obs(const FcmdpEnv& env) const {
  Eigen::VectorXd o(is_dim + ir_dim);
  o << env.is_obs().flat(), env.ir_obs().flat();
  return o;
}

void JointPolicy::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("JointPolicy::save: cannot open " + path);
  BinWriter w{os};
  write_header(w, "joint-policy");
  w.i32(n_is_actions);
  w.i32(n_ir_skills);
  w.i32(is_dim);
  w.i32(ir_dim);
  write_mlp(w, ac.actor);
  write_mlp(w, ac.critic);
}

JointPolicy JointPolicy::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("JointPolicy::load: cannot open " + path);
  BinReader r{is};
  if (read_header(r) != "joint-policy")
    throw std::runtime_error("JointPolicy::load: wrong checkpoint kind");
  JointPolicy p;
  p.n_is_actions = r.i32();
  p.n_ir_skills = r.i32();
  p.is_dim = r.i32();
  p.ir_dim = r.i32();
  p.ac.actor = read_mlp(r);
  p.ac.critic = read_mlp(r);
  return p;
}

JointPolicy train_full_rl(FcmdpEnv& env, const FullRlConfig& cfg, std::uint64_t seed) {
  JointPolicy policy;
  policy.n_is_actions = env.is_action_arity();
  policy.n_ir_skills = env.n_ir_skills();
  policy.is_dim = env.is_obs().flat_dim();
  policy.ir_dim = env.ir_obs().flat_dim();
  int n_actions = policy.n_is_actions + policy.n_ir_skills;
  policy.ac = ActorCritic::init(policy.is_dim + policy.ir_dim, n_actions, cfg.hidden,
                                RngStream::derive_seed(seed, "full-rl-init"));

  RngStream rollout_rng = RngStream::derive(seed, "rollout");
  RngStream ppo_rng = RngStream::derive(seed, "ppo-shuffle");
  AdamState actor_opt = AdamState::zeros(policy.ac.actor.params.size());
  AdamState critic_opt = AdamState::zeros(policy.ac.critic.params.size());
  RolloutBuffer buffer;
  bool live = false;

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    buffer.clear();
    for (int i = 0; i < cfg.rollout_steps; ++i) {
      if (env.done() || !live) {
        env.reset();
        live = true;
      }
      Eigen::VectorXd obs = policy.joint_obs(env);
      CategoricalDist d = policy.ac.dist(obs);
      int a = sample(d, rollout_rng);
      double logp = std::log(std::max(d.probs[a], 1e-12));
      double v = policy.ac.value(obs);
      double reward;
      if (a < policy.n_is_actions) {
        env.step_is(a);
        reward = -0.1;  // non-completing timestep
      } else {
        reward = env.step_ir(a - policy.n_is_actions).reward;
      }
      bool done = env.done();
      buffer.add(std::move(obs), a, reward, v, logp, done);
      if (done) live = false;
    }
    double bootstrap = env.done() ? 0.0 : policy.ac.value(policy.joint_obs(env));
    buffer.compute_gae(bootstrap, cfg.ppo.gamma, cfg.ppo.gae_lambda);
    ppo_update(policy.ac, buffer, cfg.ppo, actor_opt, critic_opt, ppo_rng);
  }
  return policy;
}

EpisodeTrace run_full_rl_episode(FcmdpEnv& env, const JointPolicy& policy,
                                 std::uint64_t seed, bool greedy) {
  env.reset(seed);
  RngStream rng = RngStream::derive(seed, "deploy");
  EpisodeTrace trace;
  trace.task = env.task_id();
  trace.method = "full-rl";
  trace.seed = seed;
  trace.n_stages = env.n_stages();
  trace.stage_reached.assign(env.n_stages(), false);
  trace.stage_succeeded.assign(env.n_stages(), false);
  trace.cue_exposed.assign(env.n_stages(), false);
  trace.last_ir_ctx_value.assign(env.n_stages(), -1);
  trace.ir_attempted.assign(env.n_stages(), false);
  trace.stage_reached[0] = true;
  auto note_cues = [&] {
    for (int s = 0; s < env.n_stages(); ++s)
      if (env.cue_visible(s)) trace.cue_exposed[s] = true;
  };
  note_cues();

  int t = 0;
  while (!env.done()) {
    Eigen::VectorXd obs = policy.joint_obs(env);
    CategoricalDist d = policy.ac.dist(obs);
    int a = greedy ? argmax(d) : sample(d, rng);
    StepRecord rec;
    rec.t = t++;
    rec.stage_before = env.stage();
    trace.uncertainties.push_back(std::numeric_limits<double>::quiet_NaN());
    if (a < policy.n_is_actions) {
      rec.agent = AgentKind::kIs;
      rec.action = a;
      env.step_is(a);
      note_cues();
    } else {
      rec.agent = AgentKind::kIr;
      rec.action = a - policy.n_is_actions;
      trace.ir_attempted[env.stage()] = true;
      IrStepResult step = env.step_ir(rec.action);
      rec.reward = step.reward;
      rec.stage_reward = step.reward > 0.0 ? step.reward : 0.0;
      trace.total_reward += step.reward;
    }
    rec.done = env.done();
    trace.steps.push_back(rec);
    for (int s = 0; s <= std::min(env.stage(), env.n_stages() - 1); ++s)
      trace.stage_reached[s] = true;
  }
  for (int s = 0; s < env.n_stages(); ++s) trace.stage_succeeded[s] = s < env.stage();
  if (env.success()) {
    trace.outcome = Outcome::kSuccess;
  } else if (env.failed_terminal()) {
    trace.outcome = Outcome::kStageFail;
    trace.fail_stage = env.stage();
  } else {
    trace.outcome = Outcome::kTimeout;
    trace.fail_stage = env.stage() < env.n_stages() ? env.stage() : -1;
  }
  trace.gt_combo = env.context_combo_gt();
  trace.gt_values = trace.gt_combo >= 0 ? env.context_shape().values_of(trace.gt_combo)
                                        : std::vector<int>(env.n_stages(), -1);
  return trace;
}

EpisodeTrace run_sampled_context(FcmdpEnv& env, const IrPolicy& ir, std::uint64_t seed,
                                 bool greedy) {
  env.reset(seed);
  RngStream rng = RngStream::derive(seed, "ctx-sample");
  std::vector<ContextVector> contexts = env.context_set();
  int combo = rng.uniform_int(static_cast<int>(contexts.size()));
  const ContextVector& c = contexts[combo];
  std::vector<int> c_values = env.context_shape().values_of(combo);

  EpisodeTrace trace;
  trace.task = env.task_id();
  trace.method = "sampled-context";
  trace.seed = seed;
  trace.n_stages = env.n_stages();
  trace.stage_reached.assign(env.n_stages(), false);
  trace.stage_succeeded.assign(env.n_stages(), false);
  trace.cue_exposed.assign(env.n_stages(), false);
  trace.last_ir_ctx_value.assign(env.n_stages(), -1);
  trace.ir_attempted.assign(env.n_stages(), true);
  trace.stage_reached[0] = true;

  int t = 0;
  while (!env.done()) {
    StepRecord rec;
    rec.t = t++;
    rec.agent = AgentKind::kIr;
    rec.stage_before = env.stage();
    trace.uncertainties.push_back(std::numeric_limits<double>::quiet_NaN());
    trace.last_ir_ctx_value[env.stage()] = c_values[env.stage()];
    IrStepResult step;
    if (ir.continuous) {
      ActionDistribution d = ir.action_dist(env.ir_obs().flat(), c);
      Eigen::VectorXd a = greedy ? std::get<GaussianDist>(d).mean
                                 : gaussian_sample(std::get<GaussianDist>(d), rng);
      rec.action2 = a;
      step = env.step_ir(a);
    } else {
      ActionDistribution d = ir.action_dist(env.ir_obs().flat(), c);
      int a = greedy ? argmax(std::get<CategoricalDist>(d))
                     : sample(std::get<CategoricalDist>(d), rng);
      rec.action = a;
      step = env.step_ir(a);
    }
    rec.reward = step.reward;
    rec.stage_reward = step.reward > 0.0 ? step.reward : 0.0;
    trace.total_reward += step.reward;
    rec.done = env.done();
    trace.steps.push_back(rec);
    for (int s = 0; s <= std::min(env.stage(), env.n_stages() - 1); ++s)
      trace.stage_reached[s] = true;
  }
  for (int s = 0; s < env.n_stages(); ++s) trace.stage_succeeded[s] = s < env.stage();
  if (env.success()) {
    trace.outcome = Outcome::kSuccess;
  } else if (env.failed_terminal()) {
    trace.outcome = Outcome::kStageFail;
    trace.fail_stage = env.stage();
  } else {
    trace.outcome = Outcome::kTimeout;
    trace.fail_stage = env.stage() < env.n_stages() ? env.stage() : -1;
  }
  trace.gt_combo = env.context_combo_gt();
  trace.gt_values = trace.gt_combo >= 0 ? env.context_shape().values_of(trace.gt_combo)
                                        : std::vector<int>(env.n_stages(), -1);
  return trace;
}

}  // namespace fcmdp
