#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcmdp/deployer.hpp"
#include "fcmdp/grid_env.hpp"
#include "fcmdp/ir_policy.hpp"
#include "fcmdp/is_trainer.hpp"

namespace fcmdp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key = value configuration with dotted sections. Unknown keys are
/// rejected; a resolved copy (defaults applied) is written into every run
/// directory.
struct ExperimentConfig {
  std::string task = "cooking";
  std::string method = "disam";
  std::string context_mode = "onehot";  // onehot | embedding
  std::string ir_head = "categorical";  // categorical | gaussian
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;  // defaults to {seed}
  std::string out;

  double env_noise_scale = 0.0;
  int env_is_budget = 60;
  int env_ir_budget = 30;
  int env_embedding_dim = 16;

  int demos_episodes = 500;
  BcConfig bc;

  TrainConfig train;
  int checkpoint_every = 50;

  DeployConfig deploy;
  bool deploy_delta_set = false;
  int deploy_episodes = 50;

  std::vector<double> noise_scales = {0.0, 0.1, 0.3, 1.0};
  int noise_episodes = 50;

  std::string demos_path;
  std::string ir_ckpt;
  std::string is_ckpt;
  std::string ensemble_ckpt;
  std::string joint_ckpt;

  std::vector<std::uint64_t> resolved_seeds() const;
  bool continuous_ir() const { return ir_head == "gaussian"; }
  ContextMode mode() const {
    return context_mode == "embedding" ? ContextMode::kEmbedding
                                       : ContextMode::kOneHot;
  }
  GridOptions grid_options(std::uint64_t env_seed) const;
  /// Spec default: 0.5 for discrete IR heads; continuous heads are calibrated
  /// at deploy time unless deploy.delta was set explicitly.
  double resolved_delta() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Every known key with its resolved value, in a stable order.
std::string serialize_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

/// FCMDP_LOG: 0 = errors only, 1 = progress (default), 2 = debug.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace fcmdp
