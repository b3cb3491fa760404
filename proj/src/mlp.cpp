#include "fcmdp/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace fcmdp {

int MlpSpec::layer_in(int l) const {
  return l == 0 ? input_dim : hidden_dims[l - 1];
}

int MlpSpec::layer_out(int l) const {
  return l == static_cast<int>(hidden_dims.size()) ? output_dim : hidden_dims[l];
}

int MlpSpec::param_count() const {
  int n = 0;
  for (int l = 0; l < n_layers(); ++l) n += layer_out(l) * (layer_in(l) + 1);
  return n;
}

std::vector<ParamSegment> mlp_layout(const MlpSpec& spec) {
  std::vector<ParamSegment> segs;
  int off = 0;
  for (int l = 0; l < spec.n_layers(); ++l) {
    int in = spec.layer_in(l), out = spec.layer_out(l);
    segs.push_back({"W" + std::to_string(l), out, in, off});
    off += out * in;
    segs.push_back({"b" + std::to_string(l), out, 1, off});
    off += out;
  }
  return segs;
}

namespace {

int weight_offset(const MlpSpec& spec, int l) {
  int off = 0;
  for (int i = 0; i < l; ++i) off += spec.layer_out(i) * (spec.layer_in(i) + 1);
  return off;
}

}  // namespace

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int l) const {
  int in = spec.layer_in(l), out = spec.layer_out(l);
  return {params.data() + weight_offset(spec, l), out, in};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::bias(int l) const {
  int in = spec.layer_in(l), out = spec.layer_out(l);
  return {params.data() + weight_offset(spec, l) + out * in, out, 1};
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int l) {
  int in = spec.layer_in(l), out = spec.layer_out(l);
  return {params.data() + weight_offset(spec, l), out, in};
}

Eigen::Map<Eigen::MatrixXd> Mlp::bias(int l) {
  int in = spec.layer_in(l), out = spec.layer_out(l);
  return {params.data() + weight_offset(spec, l) + out * in, out, 1};
}

Mlp Mlp::init(const MlpSpec& spec, RngStream& rng, double last_layer_scale) {
  for (int l = 0; l < spec.n_layers(); ++l) {
    if (spec.layer_in(l) < 1 || spec.layer_out(l) < 1)
      throw std::invalid_argument("mlp: all dims must be >= 1");
  }
  Mlp net{spec, Eigen::VectorXd::Zero(spec.param_count())};
  for (int l = 0; l < spec.n_layers(); ++l) {
    int in = spec.layer_in(l), out = spec.layer_out(l);
    double a = std::sqrt(6.0 / (in + out));  // Xavier uniform
    if (l == spec.n_layers() - 1) a *= last_layer_scale;
    auto w = net.weight(l);
    for (int j = 0; j < in; ++j)
      for (int i = 0; i < out; ++i) w(i, j) = a * (2.0 * rng.uniform() - 1.0);
    // biases stay zero
  }
  return net;
}

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  if (act == Activation::kTanh)
    z = z.array().tanh();
  else
    z = z.array().max(0.0);
}

}  // namespace

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, Tape& tape) {
  if (x.rows() != net.spec.input_dim)
    throw std::invalid_argument("mlp forward: input dim mismatch");
  tape.net = &net;
  tape.acts.assign(1, x);
  Eigen::MatrixXd a = x;
  for (int l = 0; l < net.spec.n_layers(); ++l) {
    Eigen::MatrixXd z = (net.weight(l) * a).colwise() + net.bias(l).col(0);
    if (l != net.spec.n_layers() - 1) apply_activation(net.spec.activation, z);
    a = std::move(z);
    tape.acts.push_back(a);
  }
  return a;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x) {
  if (x.rows() != net.spec.input_dim)
    throw std::invalid_argument("mlp forward: input dim mismatch");
  Eigen::MatrixXd a = x;
  for (int l = 0; l < net.spec.n_layers(); ++l) {
    Eigen::MatrixXd z = (net.weight(l) * a).colwise() + net.bias(l).col(0);
    if (l != net.spec.n_layers() - 1) apply_activation(net.spec.activation, z);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x) {
  return forward(net, Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& output_grad,
                         Eigen::VectorXd& grad) {
  const Mlp& net = *tape.net;
  if (tape.acts.empty() || output_grad.rows() != net.spec.output_dim ||
      output_grad.cols() != tape.acts[0].cols())
    throw std::invalid_argument("mlp backward: stale or mismatched tape");
  if (grad.size() != net.params.size()) grad = Eigen::VectorXd::Zero(net.params.size());

  Eigen::MatrixXd g = output_grad;
  for (int l = net.spec.n_layers() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& a_in = tape.acts[l];
    int in = net.spec.layer_in(l), out = net.spec.layer_out(l);
    int off = 0;
    for (int i = 0; i < l; ++i)
      off += net.spec.layer_out(i) * (net.spec.layer_in(i) + 1);
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + off, out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + off + out * in, out);
    gw.noalias() += g * a_in.transpose();
    gb += g.rowwise().sum();
    if (l == 0) return net.weight(0).transpose() * g;
    Eigen::MatrixXd gprev = net.weight(l).transpose() * g;
    const Eigen::MatrixXd& a_out = tape.acts[l];  // post-activation of layer l-1
    if (net.spec.activation == Activation::kTanh)
      g = gprev.array() * (1.0 - a_out.array().square());
    else
      g = gprev.array() * (a_out.array() > 0.0).cast<double>();
  }
  return {};
}

AdamState AdamState::zeros(Eigen::Index n) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  return s;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state, double lr) {
  if (grad.size() != params.size() || state.m.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v.array().matrix() +
            (1.0 - state.beta2) * grad.array().square().matrix();
  double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  params.array() -=
      lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

std::uint64_t param_checksum(const Eigen::VectorXd& params) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto* bytes = reinterpret_cast<const unsigned char*>(params.data());
  std::size_t n = static_cast<std::size_t>(params.size()) * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace fcmdp
