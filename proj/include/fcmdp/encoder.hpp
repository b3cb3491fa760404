#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "fcmdp/context.hpp"
#include "fcmdp/heads.hpp"
#include "fcmdp/mlp.hpp"

namespace fcmdp {

struct EncoderSpec {
  int input_dim = 0;
  ContextMode mode = ContextMode::kOneHot;
  ContextShape shape;
  int embedding_dim = 16;
  int mdn_components = 5;
  double std_floor = 1e-3;
  std::vector<int> hidden = {64, 64};

  int output_dim() const;
  MdnSpec mdn_spec() const { return {mdn_components, embedding_dim, std_floor}; }
};

/// Output of one encoder member: per-stage categoricals over sub-contexts, or
/// a mixture density over the embedding space.
struct ContextDistribution {
  ContextMode mode = ContextMode::kOneHot;
  std::vector<Eigen::VectorXd> stage_probs;
  MdnDist mdn;
  std::vector<StageSlice> layout;
  int arity = 0;
  int embedding_dim = 0;

  /// Deterministic point decode: per-stage argmax one-hot, or the mean of the
  /// highest-weight mixture component.
  ContextVector decode() const;
  /// Stochastic decode; per-stage categorical draw or a mixture sample.
  ContextVector sample(RngStream& rng) const;
};

/// FIFO ring buffer of (o_IS, c_GT) supervision pairs.
class EncoderReplay {
 public:
  explicit EncoderReplay(std::size_t capacity);

  void push(const Eigen::VectorXd& obs_flat, const ContextVector& c);
  std::size_t size() const { return obs_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Eigen::VectorXd& obs(std::size_t i) const;
  const Eigen::VectorXd& target(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Eigen::VectorXd> obs_;
  std::vector<Eigen::VectorXd> targets_;
};

/// k independently initialized observation encoders E: O_IS -> C sharing one
/// architecture. Members never share parameter storage; each trains on its
/// own minibatch stream.
class EncoderEnsemble {
 public:
  static EncoderEnsemble init(const EncoderSpec& spec, int k, std::uint64_t seed);

  int size() const { return static_cast<int>(members_.size()); }
  const EncoderSpec& spec() const { return spec_; }

  ContextDistribution encode(int member, const Eigen::VectorXd& is_flat) const;

  /// n contexts drawn round-robin across members (n == k visits each member
  /// once). OneHot default is the per-member argmax; `stochastic` switches to
  /// categorical sampling. Embedding mode always samples the member's MDN.
  std::vector<ContextVector> sample_contexts(const Eigen::VectorXd& is_flat, int n,
                                             RngStream& rng,
                                             bool stochastic = false) const;

  /// One gradient step per member, each on its own independently sampled
  /// minibatch; returns the mean member loss. Throws on non-finite loss.
  double update(const EncoderReplay& replay, int minibatch, double lr,
                std::vector<RngStream>& member_rngs);

  const Mlp& member(int i) const { return members_.at(i); }
  Mlp& member(int i) { return members_.at(i); }
  std::uint64_t checksum() const;

  void save(const std::string& path) const;
  static EncoderEnsemble load(const std::string& path);

 private:
  EncoderSpec spec_;
  std::vector<Mlp> members_;
  std::vector<AdamState> opt_;
};

}  // namespace fcmdp
