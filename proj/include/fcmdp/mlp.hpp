#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "fcmdp/rng.hpp"

namespace fcmdp {

enum class Activation { kTanh, kRelu };

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims;
  int output_dim = 1;
  Activation activation = Activation::kTanh;

  int n_layers() const { return static_cast<int>(hidden_dims.size()) + 1; }
  int layer_in(int l) const;
  int layer_out(int l) const;
  int param_count() const;
  bool operator==(const MlpSpec&) const = default;
};

/// Named view into a flat parameter vector; segments partition the storage.
struct ParamSegment {
  std::string name;
  int rows = 0;
  int cols = 0;
  int offset = 0;
};

std::vector<ParamSegment> mlp_layout(const MlpSpec& spec);

/// Fully connected net over a flat double parameter vector. Weights of layer
/// l live row-major-free as an Eigen map (out x in) followed by the bias.
struct Mlp {
  MlpSpec spec;
  Eigen::VectorXd params;

  static Mlp init(const MlpSpec& spec, RngStream& rng, double last_layer_scale = 1.0);

  Eigen::Map<const Eigen::MatrixXd> weight(int l) const;
  Eigen::Map<const Eigen::MatrixXd> bias(int l) const;
  Eigen::Map<Eigen::MatrixXd> weight(int l);
  Eigen::Map<Eigen::MatrixXd> bias(int l);
};

/// Cached activations from a forward pass; inputs to backward().
/// acts[0] is the input batch, acts[l+1] the output of layer l.
struct Tape {
  const Mlp* net = nullptr;
  std::vector<Eigen::MatrixXd> acts;
};

/// Single-sample and batched (columns = samples) forward passes.
Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x);
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x);
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, Tape& tape);

/// Reverse-mode gradient. Accumulates dL/dparams into grad (sized like
/// net.params) given dL/doutput for every sample on the tape; returns
/// dL/dinput.
Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& output_grad,
                         Eigen::VectorXd& grad);

/// Adaptive-moment gradient descent with bias correction.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros(Eigen::Index n);
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state, double lr);

/// FNV-1a over raw parameter bytes; used by the training-fidelity checks.
std::uint64_t param_checksum(const Eigen::VectorXd& params);

}  // namespace fcmdp
