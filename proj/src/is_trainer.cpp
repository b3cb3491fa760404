#include "fcmdp/is_trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace fcmdp {

double loss_func(const IrPolicy& ir, const Eigen::VectorXd& o_ir_flat,
                 const ContextVector& c_is, const ContextVector& c_gt,
                 int mc_samples, RngStream* rng) {
  if (c_is.mode != c_gt.mode)
    throw std::invalid_argument("loss_func: context mode mismatch");
  ActionDistribution d_is = ir.action_dist(o_ir_flat, c_is);
  ActionDistribution d_gt = ir.action_dist(o_ir_flat, c_gt);
  if (!ir.continuous) {
    const auto& p_gt = std::get<CategoricalDist>(d_gt).probs;
    const auto& p_is = std::get<CategoricalDist>(d_is).probs;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < p_gt.size(); ++i)
      loss -= p_gt[i] * std::log(std::max(p_is[i], 1e-12));
    return loss;
  }
  if (rng == nullptr)
    throw std::invalid_argument("loss_func: continuous head needs an rng");
  const auto& g_is = std::get<GaussianDist>(d_is);
  const auto& g_gt = std::get<GaussianDist>(d_gt);
  double total = 0.0;
  for (int i = 0; i < mc_samples; ++i)
    total += gaussian_nll(g_gt, gaussian_sample(g_is, *rng));
  return total / mc_samples;
}

double intrinsic_reward(double loss, double alpha, double beta, double floor) {
  return std::max(alpha - beta * loss, floor);
}

namespace {

ContextVector designated_context(const EncoderEnsemble& ensemble,
                                 const Eigen::VectorXd& is_flat) {
  return ensemble.encode(0, is_flat).decode();
}

int sample_ir_action(const IrPolicy& ir, const Eigen::VectorXd& o_ir_flat,
                     const ContextVector& c, RngStream& rng,
                     Eigen::VectorXd* cont_action) {
  ActionDistribution d = ir.action_dist(o_ir_flat, c);
  if (ir.continuous) {
    *cont_action = gaussian_sample(std::get<GaussianDist>(d), rng);
    return -1;
  }
  return sample(std::get<CategoricalDist>(d), rng);
}

}  // namespace

void collect_rollout(FcmdpEnv& env, const ActorCritic& is_policy, const IrPolicy& ir,
                     const EncoderEnsemble& ensemble, const TrainConfig& cfg,
                     RewardSource source, CollectState& state, TrainTrace* trace) {
  if (env.done() || !state.episode_live) {
    env.reset();
    state.episode_live = true;
  }
  Eigen::VectorXd o_is = env.is_obs().flat();
  CategoricalDist d = is_policy.dist(o_is);
  int a_is = sample(d, state.rollout_rng);
  double logp = std::log(std::max(d.probs[a_is], 1e-12));
  double v = is_policy.value(o_is);
  env.step_is(a_is);
  Eigen::VectorXd o_is_post = env.is_obs().flat();

  ContextVector c_is = designated_context(ensemble, o_is_post);
  const ContextVector& c_gt = env.context_gt();
  Eigen::VectorXd o_ir = env.ir_obs().flat();
  double loss =
      loss_func(ir, o_ir, c_is, c_gt, cfg.loss_mc_samples, &state.rollout_rng);
  double r = source == RewardSource::kIntrinsic
                 ? intrinsic_reward(loss, cfg.alpha, cfg.beta, cfg.reward_floor)
                 : 0.0;
  state.buffer.add(std::move(o_is), a_is, r, v, logp, env.done());
  state.replay.push(o_is_post, c_gt);
  if (trace) {
    trace->is_rewards.push_back(r);
    trace->replay_sizes.push_back(state.replay.size());
  }

  // IR phase: act on the ground-truth context while the divergence under the
  // encoded context stays below the switch threshold.
  while (!env.done() && loss < cfg.switch_threshold) {
    if (trace) trace->ir_gate_losses.push_back(loss);
    Eigen::VectorXd cont;
    int skill = sample_ir_action(ir, env.ir_obs().flat(), c_gt, state.rollout_rng, &cont);
    IrStepResult step =
        ir.continuous ? env.step_ir(cont) : env.step_ir(skill);
    if (source == RewardSource::kTaskReward) state.buffer.back().reward += step.reward;
    if (env.done()) break;
    loss = loss_func(ir, env.ir_obs().flat(), c_is, env.context_gt(),
                     cfg.loss_mc_samples, &state.rollout_rng);
  }
  if (env.done()) {
    state.buffer.back().done = true;
    state.episode_live = false;
  }
}

TrainResult train_is(FcmdpEnv& env, const IrPolicy& ir, const TrainConfig& cfg,
                     std::uint64_t seed, RewardSource source, TrainTrace* trace) {
  const int obs_dim = env.is_obs().flat_dim();
  ActorCritic ac = ActorCritic::init(obs_dim, env.is_action_arity(), cfg.hidden,
                                     RngStream::derive_seed(seed, "is-init"));
  EncoderSpec espec;
  espec.input_dim = obs_dim;
  espec.mode = env.context_mode();
  espec.shape = env.context_shape();
  espec.embedding_dim = static_cast<int>(env.context_gt().values.size());
  espec.mdn_components = cfg.mdn_components;
  espec.hidden = cfg.hidden;
  EncoderEnsemble ensemble = EncoderEnsemble::init(
      espec, cfg.ensemble_k, RngStream::derive_seed(seed, "enc-init"));

  CollectState state(cfg.replay_capacity, RngStream::derive(seed, "rollout"));
  AdamState actor_opt = AdamState::zeros(ac.actor.params.size());
  AdamState critic_opt = AdamState::zeros(ac.critic.params.size());
  RngStream ppo_rng = RngStream::derive(seed, "ppo-shuffle");
  std::vector<RngStream> member_rngs;
  for (int i = 0; i < cfg.ensemble_k; ++i)
    member_rngs.push_back(RngStream::derive(seed, "enc-batch-" + std::to_string(i)));

  TrainResult out;
  auto t0 = std::chrono::steady_clock::now();
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    state.buffer.clear();
    for (int i = 0; i < cfg.rollout_steps; ++i)
      collect_rollout(env, ac, ir, ensemble, cfg, source, state, trace);
    if (trace)
      trace->phases.push_back({'C', param_checksum(ac.actor.params),
                               param_checksum(ac.critic.params), ensemble.checksum()});

    double bootstrap = env.done() ? 0.0 : ac.value(env.is_obs().flat());
    state.buffer.compute_gae(bootstrap, cfg.ppo.gamma, cfg.ppo.gae_lambda);
    double mean_reward = 0.0;
    for (const auto& tr : state.buffer.data()) mean_reward += tr.reward;
    mean_reward /= static_cast<double>(state.buffer.size());
    if (!std::isfinite(mean_reward))
      throw std::runtime_error("train_is: non-finite reward at iteration " +
                               std::to_string(iter));
    ppo_update(ac, state.buffer, cfg.ppo, actor_opt, critic_opt, ppo_rng);
    if (trace)
      trace->phases.push_back({'P', param_checksum(ac.actor.params),
                               param_checksum(ac.critic.params), ensemble.checksum()});

    double enc_loss = 0.0;
    for (int j = 0; j < cfg.encoder_updates; ++j)
      enc_loss = ensemble.update(state.replay, cfg.encoder_batch, cfg.encoder_lr,
                                 member_rngs);
    if (trace)
      trace->phases.push_back({'E', param_checksum(ac.actor.params),
                               param_checksum(ac.critic.params), ensemble.checksum()});

    TrainLogRow row;
    row.iteration = iter;
    row.mean_reward = mean_reward;
    row.encoder_loss = enc_loss;
    row.eval_success =
        cfg.eval_hook ? cfg.eval_hook(ac, ensemble)
                      : std::numeric_limits<double>::quiet_NaN();
    row.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.log.push_back(row);

    if (cfg.checkpoint_hook && cfg.checkpoint_every > 0 &&
        (iter % cfg.checkpoint_every == 0 || iter == cfg.iterations))
      cfg.checkpoint_hook(iter, ac, ensemble);
  }
  out.is_policy = std::move(ac);
  out.ensemble = std::move(ensemble);
  return out;
}

void write_training_log_csv(const std::string& path,
                            const std::vector<TrainLogRow>& log) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "iteration,mean_reward,encoder_loss,eval_success,wall_time\n";
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.3f\n", r.iteration,
                  r.mean_reward, r.encoder_loss, r.eval_success, r.wall_time);
    os << buf;
  }
}

}  // namespace fcmdp
