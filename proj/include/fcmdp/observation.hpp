#pragma once

#include <Eigen/Dense>

#include "fcmdp/context.hpp"

namespace fcmdp {

/// Camera-side observation: flattened glyph patch, pose, optional base
/// position, and (for multi-stage tasks) a copy of the current IR features.
struct IsObservation {
  Eigen::VectorXd view;
  int pan = 0;
  int tilt = 0;
  bool has_base = false;
  int base_x = 0;
  int base_y = 0;
  int pose_range = 1;  // poses live in [0, pose_range)
  Eigen::VectorXd ir_summary;

  Eigen::VectorXd flat() const;
  int flat_dim() const;
};

/// Workspace-side observation: symbolic scene features plus proprioception.
struct IrObservation {
  Eigen::VectorXd workspace;
  Eigen::VectorXd proprio;

  Eigen::VectorXd flat() const;
  int flat_dim() const { return static_cast<int>(workspace.size() + proprio.size()); }
};

enum class AgentKind { kIs, kIr };

struct IrStepResult {
  IrObservation obs;
  double reward = 0.0;
  bool done = false;
};

struct ActionSpaceInfo {
  bool discrete = true;
  int n = 0;    // discrete arity
  int dim = 0;  // continuous dimension

  static ActionSpaceInfo make_discrete(int n) { return {true, n, 0}; }
  static ActionSpaceInfo make_continuous(int d) { return {false, 0, d}; }
};

/// One transition of either agent; the unit stored in episode traces.
struct StepRecord {
  AgentKind agent = AgentKind::kIs;
  int t = 0;
  int action = 0;
  Eigen::Vector2d action2{0.0, 0.0};  // continuous IR route
  int stage_before = 0;
  double stage_reward = 0.0;  // nonzero only at stage completions
  double reward = 0.0;
  bool done = false;
};

}  // namespace fcmdp
