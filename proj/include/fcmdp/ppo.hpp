#pragma once

#include <Eigen/Dense>

#include <vector>

#include "fcmdp/heads.hpp"
#include "fcmdp/mlp.hpp"

namespace fcmdp {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double lr = 3e-4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int epochs = 4;
  int minibatch = 256;
  bool normalize_advantages = true;
};

/// On-policy storage for one outer iteration; emptied after each update.
class RolloutBuffer {
 public:
  struct Transition {
    Eigen::VectorXd obs;
    int action = 0;
    double reward = 0.0;
    double value = 0.0;
    double logprob = 0.0;
    bool done = false;
  };

  void add(Eigen::VectorXd obs, int action, double reward, double value,
           double logprob, bool done);
  void clear();
  std::size_t size() const { return data_.size(); }
  Transition& back() { return data_.back(); }
  const std::vector<Transition>& data() const { return data_; }

  /// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t;
  /// A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}.
  void compute_gae(double bootstrap_value, double gamma, double lambda);

  const Eigen::VectorXd& advantages() const { return advantages_; }
  const Eigen::VectorXd& returns() const { return returns_; }

 private:
  std::vector<Transition> data_;
  Eigen::VectorXd advantages_;
  Eigen::VectorXd returns_;
};

/// Categorical policy + scalar critic over the same observation.
struct ActorCritic {
  Mlp actor;
  Mlp critic;

  static ActorCritic init(int obs_dim, int n_actions, const std::vector<int>& hidden,
                          std::uint64_t seed);

  CategoricalDist dist(const Eigen::VectorXd& obs) const;
  double value(const Eigen::VectorXd& obs) const;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

/// Clipped-surrogate update with entropy bonus and MSE value loss.
PpoStats ppo_update(ActorCritic& ac, const RolloutBuffer& buffer, const PpoConfig& cfg,
                    AdamState& actor_opt, AdamState& critic_opt, RngStream& rng);

}  // namespace fcmdp
