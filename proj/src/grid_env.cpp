#include "fcmdp/grid_env.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fcmdp {

Eigen::VectorXd apply_noise(const Eigen::VectorXd& obs, const NoiseSpec& spec,
                            RngStream& rng) {
  if (spec.noise_scale < 0.0) throw std::invalid_argument("noise scale must be >= 0");
  if (spec.noise_scale == 0.0) return obs;
  Eigen::VectorXd out = obs;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] += spec.noise_scale * rng.normal();
  return out;
}

namespace {

std::uint64_t table_seed(const std::string& task, int dim) {
  // Fixed per (task, dim) so every pipeline command regenerates the same table.
  return RngStream::derive_seed(0x7ab1eull + static_cast<std::uint64_t>(dim), task);
}

}  // namespace

GridCueEnv::GridCueEnv(TaskDef def, GridOptions opts)
    : def_(std::move(def)), opts_(opts) {
  noise_.noise_scale = opts_.noise_scale;
  if (opts_.context_mode == ContextMode::kEmbedding)
    table_ = EmbeddingTable::make(def_.shape, opts_.embedding_dim,
                                  table_seed(def_.id, opts_.embedding_dim));
  sentinel_ctx_.mode = opts_.context_mode;
  sentinel_ctx_.arity = -1;
  sentinel_ctx_.values = Eigen::VectorXd::Zero(
      opts_.context_mode == ContextMode::kOneHot ? def_.shape.onehot_dim()
                                                 : opts_.embedding_dim);
  reset(RngStream::derive_seed(opts_.seed, "ep-init"));
}

std::unique_ptr<FcmdpEnv> GridCueEnv::clone() const {
  return std::make_unique<GridCueEnv>(*this);
}

int GridCueEnv::is_action_arity() const {
  return 4 + (def_.has_base ? 4 : 0) + (def_.has_press ? 1 : 0);
}

ActionSpaceInfo GridCueEnv::ir_action_space() const {
  return opts_.continuous_ir ? ActionSpaceInfo::make_continuous(2)
                             : ActionSpaceInfo::make_discrete(def_.n_skills);
}

std::vector<ContextVector> GridCueEnv::context_set() const {
  std::vector<ContextVector> set;
  for (int c = 0; c < def_.shape.arity(); ++c) {
    if (opts_.context_mode == ContextMode::kOneHot)
      set.push_back(onehot_context(def_.shape, def_.shape.values_of(c)));
    else
      set.push_back(table_.context_of(c));
  }
  return set;
}

const EmbeddingTable* GridCueEnv::embedding_table() const {
  return opts_.context_mode == ContextMode::kEmbedding ? &table_ : nullptr;
}

const ContextVector& GridCueEnv::context_gt() const {
  return gt_visible_ ? ctx_vector_ : sentinel_ctx_;
}

int GridCueEnv::context_combo_gt() const { return gt_visible_ ? ctx_combo_ : -1; }

void GridCueEnv::reset(std::uint64_t seed) {
  RngStream ctx_rng = RngStream::derive(seed, "ctx");
  std::vector<int> values(def_.shape.n_stages());
  for (int s = 0; s < def_.shape.n_stages(); ++s)
    values[s] = ctx_rng.uniform_int(def_.shape.stage_arities[s]);
  start_episode(values, seed);
}

void GridCueEnv::reset() {
  reset(RngStream::derive_seed(opts_.seed, "ep-" + std::to_string(auto_episode_++)));
}

void GridCueEnv::reset_with_context(int combo, std::uint64_t seed) {
  if (combo < 0 || combo >= def_.shape.arity())
    throw std::invalid_argument("reset_with_context: combo out of range");
  start_episode(def_.shape.values_of(combo), seed);
}

void GridCueEnv::start_episode(const std::vector<int>& values, std::uint64_t seed) {
  ctx_values_ = values;
  ctx_combo_ = def_.shape.combo_of(values);
  ctx_vector_ = opts_.context_mode == ContextMode::kOneHot
                    ? onehot_context(def_.shape, values)
                    : table_.context_of(ctx_combo_);
  noise_rng_ = RngStream::derive(seed, "noise");
  pan_ = def_.camera_home.x;
  tilt_ = def_.camera_home.y;
  base_x_ = def_.base_home.x;
  base_y_ = def_.base_home.y;
  pressed_.assign(def_.grid.interactive_sites.size(), false);
  stage_ = 0;
  held_ = 0;
  last_skill_ = 0;
  is_steps_ = 0;
  ir_steps_ = 0;
  done_ = false;
  success_ = false;
  failed_terminal_ = false;
  refresh_ir_obs();
  refresh_is_obs();
}

bool GridCueEnv::cue_revealed(const GridSpec::CueSite& site) const {
  for (std::size_t i = 0; i < def_.grid.interactive_sites.size(); ++i)
    if (def_.grid.interactive_sites[i].cue == site.cell && !pressed_[i]) return false;
  for (const auto& occ : def_.grid.occluders)
    if (occ.cells.contains(site.cell) && !occ.reveal.contains({base_x_, base_y_}))
      return false;
  return true;
}

bool GridCueEnv::cue_visible(int stage) const {
  int r = def_.grid.patch_radius;
  for (const auto& site : def_.grid.cue_sites) {
    if (site.stage_id != stage) continue;
    if (std::abs(site.cell.x - pan_) <= r && std::abs(site.cell.y - tilt_) <= r &&
        cue_revealed(site))
      return true;
  }
  return false;
}

void GridCueEnv::refresh_is_obs() {
  const GridSpec& g = def_.grid;
  Eigen::VectorXd view = Eigen::VectorXd::Zero(g.view_dim());
  int r = g.patch_radius;
  int side = 2 * r + 1;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      Cell c{pan_ + dx, tilt_ + dy};
      if (c.x < 0 || c.x >= g.width || c.y < 0 || c.y >= g.height) continue;
      int cell_index = (dy + r) * side + (dx + r);
      for (const auto& site : g.cue_sites) {
        if (site.cell == c) {
          int channel = cue_revealed(site) ? 1 + ctx_values_[site.stage_id] : 0;
          view[cell_index * g.glyph_channels + channel] = 1.0;
        }
      }
    }
  }
  is_obs_.view = apply_noise(view, noise_, noise_rng_);
  is_obs_.pan = pan_;
  is_obs_.tilt = tilt_;
  is_obs_.has_base = def_.has_base;
  is_obs_.base_x = base_x_;
  is_obs_.base_y = base_y_;
  is_obs_.pose_range = std::max(def_.grid.width, def_.grid.height);
  is_obs_.ir_summary =
      n_stages() > 1 ? ir_obs_.flat() : Eigen::VectorXd();
}

void GridCueEnv::refresh_ir_obs() {
  Eigen::VectorXd workspace = Eigen::VectorXd::Zero(n_stages() + 1);
  workspace[stage_] = 1.0;
  int held_arity = def_.pick_family_arity + 1;
  Eigen::VectorXd proprio = Eigen::VectorXd::Zero(held_arity + def_.n_skills + 1 + 1);
  proprio[held_] = 1.0;
  proprio[held_arity + last_skill_] = 1.0;
  proprio[held_arity + def_.n_skills + 1] =
      static_cast<double>(stage_) / n_stages();
  ir_obs_.workspace = apply_noise(workspace, noise_, noise_rng_);
  ir_obs_.proprio = apply_noise(proprio, noise_, noise_rng_);
}

const IsObservation& GridCueEnv::step_is(int action) {
  if (done_) throw std::logic_error("step_is: episode is done");
  if (action < 0 || action >= is_action_arity())
    throw std::invalid_argument("step_is: invalid action " + std::to_string(action));
  ++is_steps_;
  const GridSpec& g = def_.grid;
  if (action == 0) pan_ = std::max(0, pan_ - 1);
  else if (action == 1) pan_ = std::min(g.width - 1, pan_ + 1);
  else if (action == 2) tilt_ = std::max(0, tilt_ - 1);
  else if (action == 3) tilt_ = std::min(g.height - 1, tilt_ + 1);
  else if (def_.has_base && action < 8) {
    if (action == 4) base_x_ = std::max(0, base_x_ - 1);
    else if (action == 5) base_x_ = std::min(g.width - 1, base_x_ + 1);
    else if (action == 6) base_y_ = std::max(0, base_y_ - 1);
    else base_y_ = std::min(g.height - 1, base_y_ + 1);
  } else {
    // press: reveals the interactive cue when the camera sits on the button
    for (std::size_t i = 0; i < g.interactive_sites.size(); ++i)
      if (g.interactive_sites[i].button == Cell{pan_, tilt_}) pressed_[i] = true;
  }
  if (is_steps_ >= opts_.is_step_budget) done_ = true;
  refresh_is_obs();
  return is_obs_;
}

int GridCueEnv::family_of(int skill) const {
  for (int s = n_stages() - 1; s >= 0; --s)
    if (skill >= def_.family_base[s]) {
      int end = s + 1 < n_stages() ? def_.family_base[s + 1] : def_.n_skills - 1;
      return skill < end ? s : -1;  // -1 = noop
    }
  return -1;
}

IrStepResult GridCueEnv::step_ir_impl(int skill, const Eigen::Vector2d*) {
  if (done_) throw std::logic_error("step_ir: episode is done");
  if (skill < 0 || skill >= def_.n_skills)
    throw std::invalid_argument("step_ir: invalid skill " + std::to_string(skill));
  ++ir_steps_;
  double reward = -0.1;
  int fam = family_of(skill);
  bool completes = stage_ < n_stages() && fam == stage_ &&
                   skill == def_.family_base[stage_] + ctx_values_[stage_];
  if (completes) {
    reward = 10.0;
    if (stage_ == 0 && def_.pick_family_arity > 0) held_ = 1 + ctx_values_[0];
    ++stage_;
    if (stage_ == n_stages()) {
      done_ = true;
      success_ = true;
    }
  } else if (fam == terminal_family()) {
    done_ = true;
    failed_terminal_ = true;
  }
  last_skill_ = 1 + skill;
  if (!done_ && ir_steps_ >= opts_.ir_step_budget) done_ = true;
  refresh_ir_obs();
  refresh_is_obs();
  return {ir_obs_, reward, done_};
}

IrStepResult GridCueEnv::step_ir(int skill) { return step_ir_impl(skill, nullptr); }

Eigen::VectorXd GridCueEnv::skill_prototype(int skill) const {
  if (skill < 0 || skill >= def_.n_skills)
    throw std::invalid_argument("skill_prototype: invalid skill");
  double theta = 2.0 * std::numbers::pi * skill / def_.n_skills;
  return Eigen::Vector2d(std::cos(theta), std::sin(theta));
}

IrStepResult GridCueEnv::step_ir(const Eigen::VectorXd& action) {
  if (action.size() != 2) throw std::invalid_argument("step_ir: expected 2-d action");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int s = 0; s < def_.n_skills; ++s) {
    double d = (skill_prototype(s) - action).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  Eigen::Vector2d raw = action;
  return step_ir_impl(best, &raw);
}

int GridCueEnv::expert_skill() const {
  if (stage_ >= n_stages()) return def_.n_skills - 1;  // noop once finished
  return def_.family_base[stage_] + ctx_values_[stage_];
}

Eigen::VectorXd GridCueEnv::expert_action_continuous() const {
  return skill_prototype(expert_skill());
}

namespace {

GridCueEnv::TaskDef cooking_def() {
  GridCueEnv::TaskDef def;
  def.id = "cooking";
  def.shape.stage_arities = {2, 2, 2};
  def.grid.height = 8;
  def.grid.width = 8;
  def.grid.glyph_channels = 3;  // max sub-arity + blank/occluded
  def.grid.cue_sites = {{{2, 3}, 0}, {{6, 1}, 1}, {{5, 6}, 2}};
  // skills: pick0 pick1 cook0 cook1 place0 place1 noop
  def.family_base = {0, 2, 4};
  def.n_skills = 7;
  def.pick_family_arity = 2;
  return def;
}

GridCueEnv::TaskDef walls_def() {
  GridCueEnv::TaskDef def;
  def.id = "walls";
  def.shape.stage_arities = {3, 3};
  def.grid.height = 8;
  def.grid.width = 8;
  def.grid.glyph_channels = 4;
  def.grid.cue_sites = {{{1, 4}, 0}, {{6, 3}, 1}};
  def.grid.occluders = {
      {{1, 4, 1, 4}, {0, 0, 2, 7}},  // left cue: base must be at x <= 2
      {{6, 3, 6, 3}, {5, 0, 7, 7}},  // right cue: base must be at x >= 5
  };
  // skills: pick0 pick1 pick2 place0 place1 place2 noop
  def.family_base = {0, 3};
  def.n_skills = 7;
  def.has_base = true;
  def.base_home = {4, 3};
  def.pick_family_arity = 3;
  return def;
}

GridCueEnv::TaskDef button_def() {
  GridCueEnv::TaskDef def;
  def.id = "button";
  def.shape.stage_arities = {4};
  def.grid.height = 8;
  def.grid.width = 8;
  def.grid.glyph_channels = 5;
  def.grid.cue_sites = {{{3, 5}, 0}};
  def.grid.interactive_sites = {{{5, 2}, {3, 5}}};
  // skills: serve0..serve3 noop
  def.family_base = {0};
  def.n_skills = 5;
  def.has_press = true;
  return def;
}

}  // namespace

std::unique_ptr<FcmdpEnv> make_cooking_grid(const GridOptions& opts) {
  return std::make_unique<GridCueEnv>(cooking_def(), opts);
}

std::unique_ptr<FcmdpEnv> make_walls_grid(const GridOptions& opts) {
  return std::make_unique<GridCueEnv>(walls_def(), opts);
}

std::unique_ptr<FcmdpEnv> make_button_grid(const GridOptions& opts) {
  return std::make_unique<GridCueEnv>(button_def(), opts);
}

std::unique_ptr<FcmdpEnv> make_env(const std::string& task, const GridOptions& opts) {
  if (task == "cooking") return make_cooking_grid(opts);
  if (task == "walls") return make_walls_grid(opts);
  if (task == "button") return make_button_grid(opts);
  throw std::invalid_argument("unknown task: " + task);
}

}  // namespace fcmdp
