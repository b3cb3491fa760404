#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fcmdp/env.hpp"
#include "fcmdp/rng.hpp"

namespace fcmdp {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
  bool contains(Cell c) const {
    return c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1;
  }
};

struct GridSpec {
  int height = 8;
  int width = 8;
  int glyph_channels = 3;
  int patch_radius = 1;  // camera sees (2r+1)^2 cells

  struct CueSite {
    Cell cell;
    int stage_id = 0;
  };
  std::vector<CueSite> cue_sites;

  struct Occluder {
    Rect cells;   // cue cells it hides
    Rect reveal;  // base positions that see through it
  };
  std::vector<Occluder> occluders;

  struct InteractiveSite {
    Cell button;
    Cell cue;
  };
  std::vector<InteractiveSite> interactive_sites;

  int patch_cells() const {
    int side = 2 * patch_radius + 1;
    return side * side;
  }
  int view_dim() const { return patch_cells() * glyph_channels; }
};

struct NoiseSpec {
  double noise_scale = 0.0;  // std of zero-centered Gaussian, resampled each step
};

/// obs + eps, eps ~ N(0, scale^2) i.i.d. per element.
Eigen::VectorXd apply_noise(const Eigen::VectorXd& obs, const NoiseSpec& spec,
                            RngStream& rng);

struct GridOptions {
  std::uint64_t seed = 0;
  ContextMode context_mode = ContextMode::kOneHot;
  bool continuous_ir = false;
  double noise_scale = 0.0;
  int is_step_budget = 60;
  int ir_step_budget = 30;
  int embedding_dim = 16;
};

/// Shared machinery of the three tasks: pan/tilt camera over a glyph grid,
/// optional base navigation and occluders, optional interactive press, and a
/// staged skill workspace with context-dependent rewards.
class GridCueEnv final : public FcmdpEnv {
 public:
  struct TaskDef {
    std::string id;
    GridSpec grid;
    ContextShape shape;
    std::vector<int> family_base;  // first skill index of each stage's family
    int n_skills = 0;              // includes trailing noop
    bool has_base = false;
    bool has_press = false;
    Cell camera_home{0, 0};
    Cell base_home{0, 0};
    int pick_family_arity = 0;  // 0 when stage 0 is not a pick family
  };

  GridCueEnv(TaskDef def, GridOptions opts);

  std::unique_ptr<FcmdpEnv> clone() const override;
  const std::string& task_id() const override { return def_.id; }

  void reset(std::uint64_t seed) override;
  void reset() override;
  void reset_with_context(int combo, std::uint64_t seed) override;

  const IsObservation& is_obs() const override { return is_obs_; }
  const IrObservation& ir_obs() const override { return ir_obs_; }

  const ContextVector& context_gt() const override;
  int context_combo_gt() const override;
  void set_context_oracle_visible(bool visible) override { gt_visible_ = visible; }

  const IsObservation& step_is(int action) override;
  IrStepResult step_ir(int skill) override;
  IrStepResult step_ir(const Eigen::VectorXd& action) override;

  int is_action_arity() const override;
  ActionSpaceInfo ir_action_space() const override;
  int n_ir_skills() const override { return def_.n_skills; }
  int n_stages() const override { return def_.shape.n_stages(); }
  int stage() const override { return stage_; }
  bool done() const override { return done_; }
  bool success() const override { return success_; }
  bool failed_terminal() const override { return failed_terminal_; }
  double discount() const override { return 0.99; }

  const ContextShape& context_shape() const override { return def_.shape; }
  ContextMode context_mode() const override { return opts_.context_mode; }
  std::vector<ContextVector> context_set() const override;
  const EmbeddingTable* embedding_table() const override;

  int expert_skill() const override;
  Eigen::VectorXd expert_action_continuous() const override;
  Eigen::VectorXd skill_prototype(int skill) const override;
  bool cue_visible(int stage) const override;

  int is_steps_taken() const override { return is_steps_; }
  int ir_steps_taken() const override { return ir_steps_; }

  const GridSpec& grid_spec() const { return def_.grid; }
  const TaskDef& task_def() const { return def_; }
  const GridOptions& options() const { return opts_; }
  Cell camera_pose() const { return {pan_, tilt_}; }
  Cell base_pose() const { return {base_x_, base_y_}; }

 private:
  void start_episode(const std::vector<int>& values, std::uint64_t seed);
  void refresh_is_obs();
  void refresh_ir_obs();
  bool cue_revealed(const GridSpec::CueSite& site) const;
  IrStepResult step_ir_impl(int skill, const Eigen::Vector2d* raw);
  int terminal_family() const { return n_stages() - 1; }
  int family_of(int skill) const;

  TaskDef def_;
  GridOptions opts_;
  NoiseSpec noise_;
  EmbeddingTable table_;  // built in Embedding mode only

  std::uint64_t auto_episode_ = 0;
  RngStream noise_rng_{0};

  std::vector<int> ctx_values_;
  int ctx_combo_ = 0;
  ContextVector ctx_vector_;
  ContextVector sentinel_ctx_;
  bool gt_visible_ = true;

  int pan_ = 0, tilt_ = 0;
  int base_x_ = 0, base_y_ = 0;
  std::vector<bool> pressed_;
  int stage_ = 0;
  int held_ = 0;       // 0 = nothing, else 1 + picked value
  int last_skill_ = 0; // 0 = none, else 1 + skill
  int is_steps_ = 0, ir_steps_ = 0;
  bool done_ = false, success_ = false, failed_terminal_ = false;

  IsObservation is_obs_;
  IrObservation ir_obs_;
};

std::unique_ptr<FcmdpEnv> make_cooking_grid(const GridOptions& opts = {});
std::unique_ptr<FcmdpEnv> make_walls_grid(const GridOptions& opts = {});
std::unique_ptr<FcmdpEnv> make_button_grid(const GridOptions& opts = {});
std::unique_ptr<FcmdpEnv> make_env(const std::string& task, const GridOptions& opts = {});

}  // namespace fcmdp
