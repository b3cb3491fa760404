#include "fcmdp/context.hpp"

#include <cmath>
#include <stdexcept>

#include "fcmdp/rng.hpp"

namespace fcmdp {

int ContextShape::arity() const {
  int a = 1;
  for (int s : stage_arities) a *= s;
  return a;
}

int ContextShape::combo_of(const std::vector<int>& values) const {
  if (values.size() != stage_arities.size())
    throw std::invalid_argument("combo_of: stage count mismatch");
  int c = 0;
  for (int s = 0; s < n_stages(); ++s) {
    if (values[s] < 0 || values[s] >= stage_arities[s])
      throw std::invalid_argument("combo_of: value out of range");
    c = c * stage_arities[s] + values[s];
  }
  return c;
}

std::vector<int> ContextShape::values_of(int combo) const {
  std::vector<int> v(stage_arities.size());
  for (int s = n_stages() - 1; s >= 0; --s) {
    v[s] = combo % stage_arities[s];
    combo /= stage_arities[s];
  }
  return v;
}

int ContextShape::onehot_dim() const {
  int d = 0;
  for (int s : stage_arities) d += s;
  return d;
}

std::vector<StageSlice> ContextShape::onehot_layout() const {
  std::vector<StageSlice> layout;
  int off = 0;
  for (int s = 0; s < n_stages(); ++s) {
    layout.push_back({s, off, stage_arities[s]});
    off += stage_arities[s];
  }
  return layout;
}

int ContextVector::stage_value(int stage) const {
  const StageSlice& sl = stage_layout.at(stage);
  Eigen::Index i = 0;
  values.segment(sl.begin, sl.size).maxCoeff(&i);
  return static_cast<int>(i);
}

bool ContextVector::valid() const {
  if (!values.allFinite()) return false;
  int covered = 0;
  for (const StageSlice& sl : stage_layout) {
    if (sl.begin < 0 || sl.begin + sl.size > values.size()) return false;
    covered += sl.size;
    if (mode == ContextMode::kOneHot) {
      auto seg = values.segment(sl.begin, sl.size);
      int ones = 0;
      for (Eigen::Index i = 0; i < seg.size(); ++i) {
        if (seg[i] == 1.0)
          ++ones;
        else if (seg[i] != 0.0)
          return false;
      }
      if (ones != 1) return false;
    }
  }
  return covered == values.size();
}

ContextVector onehot_context(const ContextShape& shape, const std::vector<int>& values) {
  ContextVector c;
  c.mode = ContextMode::kOneHot;
  c.arity = shape.arity();
  c.stage_layout = shape.onehot_layout();
  c.values = Eigen::VectorXd::Zero(shape.onehot_dim());
  for (int s = 0; s < shape.n_stages(); ++s)
    c.values[c.stage_layout[s].begin + values[s]] = 1.0;
  return c;
}

EmbeddingTable EmbeddingTable::make(const ContextShape& shape, int dim,
                                    std::uint64_t seed) {
  EmbeddingTable t;
  t.dim = dim;
  t.shape = shape;
  t.entries.resize(shape.arity(), dim);
  RngStream rng = RngStream::derive(seed, "embed-table");
  for (int i = 0; i < t.entries.rows(); ++i) {
    for (int j = 0; j < dim; ++j) t.entries(i, j) = rng.normal();
    t.entries.row(i) /= t.entries.row(i).norm();
  }
  return t;
}

int EmbeddingTable::nearest(const Eigen::VectorXd& v) const {
  Eigen::Index best = 0;
  (entries.rowwise() - v.transpose()).rowwise().squaredNorm().minCoeff(&best);
  return static_cast<int>(best);
}

ContextVector EmbeddingTable::context_of(int combo) const {
  ContextVector c;
  c.mode = ContextMode::kEmbedding;
  c.arity = shape.arity();
  c.stage_layout = {{0, 0, dim}};
  c.values = entries.row(combo).transpose();
  return c;
}

}  // namespace fcmdp
