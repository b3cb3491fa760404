#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace fcmdp {

enum class ContextMode { kOneHot, kEmbedding };

/// Which slice of the context vector encodes each stage's sub-context.
struct StageSlice {
  int stage_id = 0;
  int begin = 0;
  int size = 0;
};

/// Per-stage discrete structure of a context set: stage_arities[s] choices at
/// stage s; a full assignment is a "combo" in mixed radix.
struct ContextShape {
  std::vector<int> stage_arities;

  int n_stages() const { return static_cast<int>(stage_arities.size()); }
  int arity() const;
  int combo_of(const std::vector<int>& values) const;
  std::vector<int> values_of(int combo) const;
  int onehot_dim() const;
  std::vector<StageSlice> onehot_layout() const;
};

/// Hidden episode variable: one-hot per stage slice, or a continuous
/// embedding shared across the whole context set.
struct ContextVector {
  ContextMode mode = ContextMode::kOneHot;
  Eigen::VectorXd values;
  int arity = 0;
  std::vector<StageSlice> stage_layout;

  /// OneHot mode only: argmax inside the stage's slice.
  int stage_value(int stage) const;
  bool valid() const;
};

ContextVector onehot_context(const ContextShape& shape, const std::vector<int>& values);

/// Stand-in for a pretrained text encoder: a fixed, seeded table of unit-norm
/// random embeddings, one per discrete context combination.
struct EmbeddingTable {
  int dim = 16;
  ContextShape shape;
  Eigen::MatrixXd entries;  // arity x dim, unit rows

  static EmbeddingTable make(const ContextShape& shape, int dim, std::uint64_t seed);
  int nearest(const Eigen::VectorXd& v) const;
  ContextVector context_of(int combo) const;
};

}  // namespace fcmdp
