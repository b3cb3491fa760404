#include "fcmdp/ppo.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fcmdp {

void RolloutBuffer::add(Eigen::VectorXd obs, int action, double reward, double value,
                        double logprob, bool done) {
  data_.push_back({std::move(obs), action, reward, value, logprob, done});
}

void RolloutBuffer::clear() {
  data_.clear();
  advantages_.resize(0);
  returns_.resize(0);
}

void RolloutBuffer::compute_gae(double bootstrap_value, double gamma, double lambda) {
  const auto n = static_cast<Eigen::Index>(data_.size());
  advantages_.resize(n);
  returns_.resize(n);
  double last_adv = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const Transition& tr = data_[t];
    double nonterminal = tr.done ? 0.0 : 1.0;
    double next_value = t == n - 1 ? bootstrap_value : data_[t + 1].value;
    double delta = tr.reward + gamma * next_value * nonterminal - tr.value;
    last_adv = delta + gamma * lambda * nonterminal * last_adv;
    advantages_[t] = last_adv;
    returns_[t] = last_adv + tr.value;
  }
}

ActorCritic ActorCritic::init(int obs_dim, int n_actions,
                              const std::vector<int>& hidden, std::uint64_t seed) {
  MlpSpec aspec{obs_dim, hidden, n_actions, Activation::kTanh};
  MlpSpec cspec{obs_dim, hidden, 1, Activation::kTanh};
  RngStream arng = RngStream::derive(seed, "actor");
  RngStream crng = RngStream::derive(seed, "critic");
  return {Mlp::init(aspec, arng, 0.01), Mlp::init(cspec, crng, 1.0)};
}

CategoricalDist ActorCritic::dist(const Eigen::VectorXd& obs) const {
  return {softmax(forward(actor, obs))};
}

double ActorCritic::value(const Eigen::VectorXd& obs) const {
  return forward(critic, obs)[0];
}

namespace {

void clip_grad(Eigen::VectorXd& g, double max_norm) {
  double n = g.norm();
  if (n > max_norm) g *= max_norm / n;
}

}  // namespace

PpoStats ppo_update(ActorCritic& ac, const RolloutBuffer& buffer, const PpoConfig& cfg,
                    AdamState& actor_opt, AdamState& critic_opt, RngStream& rng) {
  const auto& data = buffer.data();
  const int n = static_cast<int>(data.size());
  if (n == 0) throw std::invalid_argument("ppo_update: empty buffer");
  const int obs_dim = ac.actor.spec.input_dim;
  const int n_actions = ac.actor.spec.output_dim;

  Eigen::MatrixXd obs(obs_dim, n);
  for (int i = 0; i < n; ++i) obs.col(i) = data[i].obs;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  PpoStats stats;
  int stat_batches = 0;
  Eigen::VectorXd agrad(ac.actor.params.size());
  Eigen::VectorXd cgrad(ac.critic.params.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = n; i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_int(i)]);
    for (int start = 0; start < n; start += cfg.minibatch) {
      int m = std::min(cfg.minibatch, n - start);
      Eigen::MatrixXd x(obs_dim, m);
      Eigen::VectorXd adv(m);
      for (int j = 0; j < m; ++j) {
        x.col(j) = obs.col(order[start + j]);
        adv[j] = buffer.advantages()[order[start + j]];
      }
      if (cfg.normalize_advantages && m > 1) {
        double mean = adv.mean();
        double sd = std::sqrt((adv.array() - mean).square().sum() / m) + 1e-8;
        adv = (adv.array() - mean) / sd;
      }

      // policy
      Tape atape;
      Eigen::MatrixXd logits = forward(ac.actor, x, atape);
      Eigen::MatrixXd dlogits(n_actions, m);
      double ploss = 0.0, ent = 0.0;
      for (int j = 0; j < m; ++j) {
        const auto& tr = data[order[start + j]];
        Eigen::VectorXd p = softmax(logits.col(j));
        double logp = std::log(std::max(p[tr.action], 1e-12));
        double ratio = std::exp(logp - tr.logprob);
        double lo = 1.0 - cfg.clip_ratio, hi = 1.0 + cfg.clip_ratio;
        double clipped = std::clamp(ratio, lo, hi);
        double a = adv[j];
        Eigen::VectorXd g_logp = -p;
        g_logp[tr.action] += 1.0;  // d logp / d logits
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n_actions);
        // -min(r*A, clip(r)*A): gradient flows only through the selected
        // branch, and the clipped branch is flat in the clip region.
        if (ratio * a <= clipped * a)
          g = -a * ratio * g_logp;
        ploss += -std::min(ratio * a, clipped * a);
        double h = categorical_entropy(p);
        ent += h;
        for (int k = 0; k < n_actions; ++k) {
          double logpk = std::log(std::max(p[k], 1e-12));
          g[k] += cfg.entropy_coef * p[k] * (logpk + h);
        }
        dlogits.col(j) = g / static_cast<double>(m);
      }
      agrad.setZero();
      backward(atape, dlogits, agrad);
      clip_grad(agrad, cfg.max_grad_norm);
      adam_step(ac.actor.params, agrad, actor_opt, cfg.lr);

      // value
      Tape ctape;
      Eigen::MatrixXd v = forward(ac.critic, x, ctape);
      Eigen::MatrixXd dv(1, m);
      double vloss = 0.0;
      for (int j = 0; j < m; ++j) {
        double err = v(0, j) - buffer.returns()[order[start + j]];
        vloss += 0.5 * err * err;
        dv(0, j) = cfg.value_coef * err / static_cast<double>(m);
      }
      cgrad.setZero();
      backward(ctape, dv, cgrad);
      clip_grad(cgrad, cfg.max_grad_norm);
      adam_step(ac.critic.params, cgrad, critic_opt, cfg.lr);

      stats.policy_loss += ploss / m;
      stats.value_loss += vloss / m;
      stats.entropy += ent / m;
      ++stat_batches;
    }
  }
  if (stat_batches > 0) {
    stats.policy_loss /= stat_batches;
    stats.value_loss /= stat_batches;
    stats.entropy /= stat_batches;
  }
  if (!std::isfinite(stats.policy_loss) || !std::isfinite(stats.value_loss))
    throw std::runtime_error("ppo_update: non-finite loss");
  return stats;
}

}  // namespace fcmdp
