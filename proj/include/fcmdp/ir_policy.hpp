#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "fcmdp/env.hpp"
#include "fcmdp/heads.hpp"
#include "fcmdp/mlp.hpp"

namespace fcmdp {

/// One expert transition, labeled with the episode's ground-truth context.
struct DemoRecord {
  int episode = 0;
  int t = 0;
  Eigen::VectorXd obs;  // flattened IrObservation
  int skill = 0;
  Eigen::Vector2d action2{0.0, 0.0};  // continuous route
  Eigen::VectorXd context;
};

struct DemoDataset {
  std::string env_id;
  std::uint64_t seed = 0;
  ContextMode mode = ContextMode::kOneHot;
  bool continuous = false;
  int obs_dim = 0;
  int ctx_dim = 0;
  int n_skills = 0;
  Eigen::MatrixXd prototypes;  // n_skills x 2 when continuous
  std::vector<DemoRecord> records;
};

/// Scripted-expert rollouts with ground-truth context labels. Throws if the
/// expert ever fails an episode (that would be an environment bug).
DemoDataset collect_demos(FcmdpEnv& env, int n_episodes, std::uint64_t seed);

void save_demos(const DemoDataset& d, const std::string& path);
DemoDataset load_demos(const std::string& path);

/// Context-conditioned action policy pi_IR(o_IR, c): MLP over [obs, context]
/// with a categorical head over skills or a diagonal-Gaussian head.
struct IrPolicy {
  bool continuous = false;
  int n_actions = 0;
  int action_dim = 0;
  int obs_dim = 0;
  int ctx_dim = 0;
  double std_floor = 1e-3;
  Eigen::MatrixXd prototypes;
  Mlp net;

  ActionDistribution action_dist(const Eigen::VectorXd& obs_flat,
                                 const ContextVector& c) const;
  ActionDistribution action_dist(const IrObservation& obs, const ContextVector& c) const;

  /// Greedy action: categorical argmax, or the Gaussian mean.
  int greedy_skill(const Eigen::VectorXd& obs_flat, const ContextVector& c) const;
  Eigen::VectorXd greedy_action2(const Eigen::VectorXd& obs_flat,
                                 const ContextVector& c) const;

  void save(const std::string& path) const;
  static IrPolicy load(const std::string& path);
};

struct BcConfig {
  int epochs = 50;
  double lr = 1e-3;
  int minibatch = 64;
  double holdout_fraction = 0.1;
  std::vector<int> hidden = {64, 64};
};

struct BcResult {
  IrPolicy policy;
  std::vector<double> epoch_losses;
  double holdout_accuracy = 0.0;
};

/// Behavior cloning on (obs, context) -> expert action; CE for the discrete
/// head, Gaussian NLL for the continuous one. Holdout split is by episode.
BcResult train_bc(const DemoDataset& data, const BcConfig& cfg, std::uint64_t seed);

/// Fraction of records where the policy's greedy action matches the expert
/// (nearest prototype for the continuous head).
double action_accuracy(const IrPolicy& policy, const DemoDataset& data,
                       std::size_t begin, std::size_t end);

}  // namespace fcmdp
