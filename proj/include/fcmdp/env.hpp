#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fcmdp/context.hpp"
#include "fcmdp/observation.hpp"

namespace fcmdp {

/// Factorized-CMDP environment: camera-side (IS) and workspace-side (IR)
/// action/observation spaces with a hidden per-episode context. IS actions
/// never change workspace task state (designated interactive presses aside);
/// IR actions never change the camera pose.
///
/// Instances are independent; a single instance must only be driven by one
/// caller at a time.
class FcmdpEnv {
 public:
  virtual ~FcmdpEnv() = default;
  virtual std::unique_ptr<FcmdpEnv> clone() const = 0;
  virtual const std::string& task_id() const = 0;

  virtual void reset(std::uint64_t seed) = 0;
  /// Next episode from the construction-seeded stream.
  virtual void reset() = 0;
  /// Evaluation/test hook: reset with a forced context combination.
  virtual void reset_with_context(int combo, std::uint64_t seed) = 0;

  virtual const IsObservation& is_obs() const = 0;
  virtual const IrObservation& ir_obs() const = 0;

  /// Ground-truth context. Training and post-hoc evaluation only; deployment
  /// control paths must not read it (see set_context_oracle_visible).
  virtual const ContextVector& context_gt() const = 0;
  virtual int context_combo_gt() const = 0;
  /// When false, context_gt()/context_combo_gt() return a sentinel; used to
  /// prove deployment never consults the oracle.
  virtual void set_context_oracle_visible(bool visible) = 0;

  virtual const IsObservation& step_is(int action) = 0;
  virtual IrStepResult step_ir(int skill) = 0;
  virtual IrStepResult step_ir(const Eigen::VectorXd& action) = 0;

  virtual int is_action_arity() const = 0;
  virtual ActionSpaceInfo ir_action_space() const = 0;
  virtual int n_ir_skills() const = 0;
  virtual int n_stages() const = 0;
  /// Current stage index; equals n_stages() once every stage is complete.
  virtual int stage() const = 0;
  virtual bool done() const = 0;
  virtual bool success() const = 0;
  /// Episode ended by executing a terminal-family skill incorrectly.
  virtual bool failed_terminal() const = 0;
  virtual double discount() const = 0;

  virtual const ContextShape& context_shape() const = 0;
  virtual ContextMode context_mode() const = 0;
  virtual std::vector<ContextVector> context_set() const = 0;
  /// Null in OneHot mode.
  virtual const EmbeddingTable* embedding_table() const = 0;

  /// Scripted expert for the current (stage, context).
  virtual int expert_skill() const = 0;
  virtual Eigen::VectorXd expert_action_continuous() const = 0;
  virtual Eigen::VectorXd skill_prototype(int skill) const = 0;

  /// Whether the current IS state exposes the given stage's unoccluded,
  /// revealed cue glyph. Geometric; used for failure labeling.
  virtual bool cue_visible(int stage) const = 0;

  virtual int is_steps_taken() const = 0;
  virtual int ir_steps_taken() const = 0;
};

}  // namespace fcmdp
