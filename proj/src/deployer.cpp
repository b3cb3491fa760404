#include "fcmdp/deployer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fcmdp {

int PolicyIsActor::act(const IsObservation& obs, RngStream& rng) {
  CategoricalDist d = ac_->dist(obs.flat());
  return greedy_ ? argmax(d) : sample(d, rng);
}

int random_cam_policy(int last_action, int n_actions, RngStream& rng) {
  if (n_actions < 2) throw std::invalid_argument("random_cam_policy: n_actions < 2");
  if (last_action < 0) return rng.uniform_int(n_actions);
  double repeat_p = 0.5 + 1.0 / n_actions;
  if (rng.uniform() < repeat_p) return last_action;
  int pick = rng.uniform_int(n_actions - 1);
  return pick < last_action ? pick : pick + 1;
}

int RandomCamActor::act(const IsObservation&, RngStream& rng) {
  last_ = random_cam_policy(last_, n_actions_, rng);
  return last_;
}

double pairwise_kl(const std::vector<ActionDistribution>& dists) {
  const int n = static_cast<int>(dists.size());
  if (n < 2) throw std::invalid_argument("pairwise_kl: need at least two distributions");
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) total += kl_divergence(dists[i], dists[j]);
  return total / (static_cast<double>(n) * (n - 1));
}

double uncertainty(const EncoderEnsemble& ensemble, const IrPolicy& ir,
                   const Eigen::VectorXd& is_flat, const Eigen::VectorXd& ir_flat,
                   int n, RngStream& rng, bool stochastic) {
  std::vector<ContextVector> contexts =
      ensemble.sample_contexts(is_flat, n, rng, stochastic);
  std::vector<ActionDistribution> dists;
  dists.reserve(contexts.size());
  for (const ContextVector& c : contexts) dists.push_back(ir.action_dist(ir_flat, c));
  return pairwise_kl(dists);
}

int EpisodeTrace::ir_step_count() const {
  int n = 0;
  for (const auto& s : steps) n += s.agent == AgentKind::kIr;
  return n;
}

int EpisodeTrace::is_step_count() const {
  int n = 0;
  for (const auto& s : steps) n += s.agent == AgentKind::kIs;
  return n;
}

namespace {

/// Member aggregate fed to IR when the gate opens: per-stage majority vote of
/// the member argmaxes (OneHot) or the mean over members of each member's
/// component-weighted MDN mean (Embedding).
ContextVector aggregate_context(const EncoderEnsemble& ensemble,
                                const Eigen::VectorXd& is_flat) {
  const EncoderSpec& spec = ensemble.spec();
  if (spec.mode == ContextMode::kOneHot) {
    std::vector<StageSlice> layout = spec.shape.onehot_layout();
    ContextVector c;
    c.mode = ContextMode::kOneHot;
    c.arity = spec.shape.arity();
    c.stage_layout = layout;
    c.values = Eigen::VectorXd::Zero(spec.shape.onehot_dim());
    std::vector<std::vector<int>> votes(layout.size());
    for (std::size_t s = 0; s < layout.size(); ++s)
      votes[s].assign(layout[s].size, 0);
    for (int m = 0; m < ensemble.size(); ++m) {
      ContextDistribution d = ensemble.encode(m, is_flat);
      for (std::size_t s = 0; s < layout.size(); ++s) {
        Eigen::Index i = 0;
        d.stage_probs[s].maxCoeff(&i);
        votes[s][static_cast<std::size_t>(i)] += 1;
      }
    }
    for (std::size_t s = 0; s < layout.size(); ++s) {
      int best = 0;
      for (int v = 1; v < layout[s].size; ++v)
        if (votes[s][v] > votes[s][best]) best = v;
      c.values[layout[s].begin + best] = 1.0;
    }
    return c;
  }
  ContextVector c;
  c.mode = ContextMode::kEmbedding;
  c.arity = spec.shape.arity();
  c.stage_layout = {{0, 0, spec.embedding_dim}};
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(spec.embedding_dim);
  for (int m = 0; m < ensemble.size(); ++m)
    acc += mdn_mean(ensemble.encode(m, is_flat).mdn);
  c.values = acc / ensemble.size();
  return c;
}

/// Stage value the IR policy was effectively conditioned on, for post-hoc
/// failure attribution.
int ctx_stage_value(const ContextVector& c, int stage, const EmbeddingTable* table) {
  if (c.mode == ContextMode::kOneHot) return c.stage_value(stage);
  if (table == nullptr) return -1;
  return table->shape.values_of(table->nearest(c.values))[stage];
}

}  // namespace

EpisodeTrace run_episode(FcmdpEnv& env, IsActor& is_actor, const IrPolicy& ir,
                         const EncoderEnsemble& ensemble, const DeployConfig& cfg,
                         std::uint64_t seed) {
  env.reset(seed);
  is_actor.begin_episode();
  RngStream rng = RngStream::derive(seed, "deploy");

  EpisodeTrace trace;
  trace.task = env.task_id();
  trace.seed = seed;
  trace.n_stages = env.n_stages();
  trace.stage_reached.assign(env.n_stages(), false);
  trace.stage_succeeded.assign(env.n_stages(), false);
  trace.cue_exposed.assign(env.n_stages(), false);
  trace.last_ir_ctx_value.assign(env.n_stages(), -1);
  trace.ir_attempted.assign(env.n_stages(), false);

  auto note_cues = [&] {
    for (int s = 0; s < env.n_stages(); ++s)
      if (env.cue_visible(s)) trace.cue_exposed[s] = true;
  };
  note_cues();
  trace.stage_reached[0] = true;

  int t = 0;
  bool was_ir = false;
  bool any_step = false;
  while (!env.done() && t < cfg.max_steps) {
    Eigen::VectorXd is_flat = env.is_obs().flat();
    Eigen::VectorXd ir_flat = env.ir_obs().flat();
    double u = uncertainty(ensemble, ir, is_flat, ir_flat, cfg.n, rng,
                           cfg.stochastic_encoder_sampling);
    trace.uncertainties.push_back(u);
    StepRecord rec;
    rec.t = t;
    rec.stage_before = env.stage();
    if (u < cfg.delta) {
      ContextVector c;
      if (cfg.pooled_sampling) {
        std::vector<ContextVector> pool = ensemble.sample_contexts(
            is_flat, cfg.n, rng, cfg.stochastic_encoder_sampling);
        c = pool[static_cast<std::size_t>(rng.uniform_int(cfg.n))];
      } else {
        c = aggregate_context(ensemble, is_flat);
      }
      int stage = env.stage();
      trace.ir_attempted[stage] = true;
      trace.last_ir_ctx_value[stage] =
          ctx_stage_value(c, stage, env.embedding_table());
      rec.agent = AgentKind::kIr;
      IrStepResult step;
      if (ir.continuous) {
        ActionDistribution d = ir.action_dist(ir_flat, c);
        Eigen::VectorXd a = cfg.greedy_ir
                                ? std::get<GaussianDist>(d).mean
                                : gaussian_sample(std::get<GaussianDist>(d), rng);
        rec.action2 = a;
        step = env.step_ir(a);
      } else {
        ActionDistribution d = ir.action_dist(ir_flat, c);
        int a = cfg.greedy_ir ? argmax(std::get<CategoricalDist>(d))
                              : sample(std::get<CategoricalDist>(d), rng);
        rec.action = a;
        step = env.step_ir(a);
      }
      rec.reward = step.reward;
      rec.stage_reward = step.reward > 0.0 ? step.reward : 0.0;
      trace.total_reward += step.reward;
      if (!any_step || !was_ir) trace.switches.push_back({t, true, u});
      was_ir = true;
    } else {
      rec.agent = AgentKind::kIs;
      rec.action = is_actor.act(env.is_obs(), rng);
      env.step_is(rec.action);
      note_cues();
      if (any_step && was_ir) trace.switches.push_back({t, false, u});
      was_ir = false;
    }
    any_step = true;
    rec.done = env.done();
    trace.steps.push_back(rec);
    for (int s = 0; s <= std::min(env.stage(), env.n_stages() - 1); ++s)
      trace.stage_reached[s] = true;
    ++t;
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
  if (trace.gt_combo >= 0)
    trace.gt_values = env.context_shape().values_of(trace.gt_combo);
  else
    trace.gt_values.assign(env.n_stages(), -1);
  return trace;
}

double calibrate_delta(FcmdpEnv& env, const ActorCritic& is_policy, const IrPolicy& ir,
                       const EncoderEnsemble& ensemble, int episodes,
                       std::uint64_t seed, int n_samples) {
  std::vector<double> at_cue;
  for (int ep = 0; ep < episodes; ++ep) {
    std::uint64_t ep_seed = RngStream::derive_seed(seed, "calib-" + std::to_string(ep));
    env.reset(ep_seed);
    RngStream rng = RngStream::derive(ep_seed, "calib");
    while (!env.done()) {
      double u = uncertainty(ensemble, ir, env.is_obs().flat(), env.ir_obs().flat(),
                             n_samples, rng);
      if (env.stage() < env.n_stages() && env.cue_visible(env.stage()))
        at_cue.push_back(u);
      env.step_is(sample(is_policy.dist(env.is_obs().flat()), rng));
    }
  }
  if (at_cue.empty())
    throw std::runtime_error("calibrate_delta: no cue-visible states encountered");
  std::sort(at_cue.begin(), at_cue.end());
  std::size_t idx = static_cast<std::size_t>(0.95 * (at_cue.size() - 1));
  return at_cue[idx];
}

}  // namespace fcmdp
