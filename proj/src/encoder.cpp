#include "fcmdp/encoder.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fcmdp/checkpoint.hpp"

namespace fcmdp {

int EncoderSpec::output_dim() const {
  return mode == ContextMode::kOneHot ? shape.onehot_dim() : mdn_spec().raw_size();
}

ContextVector ContextDistribution::decode() const {
  ContextVector c;
  c.mode = mode;
  c.arity = arity;
  c.stage_layout = layout;
  if (mode == ContextMode::kOneHot) {
    int dim = 0;
    for (const auto& sl : layout) dim += sl.size;
    c.values = Eigen::VectorXd::Zero(dim);
    for (std::size_t s = 0; s < stage_probs.size(); ++s) {
      Eigen::Index i = 0;
      stage_probs[s].maxCoeff(&i);
      c.values[layout[s].begin + i] = 1.0;
    }
  } else {
    Eigen::Index k = 0;
    mdn.weights.maxCoeff(&k);
    c.values = mdn.means.row(k).transpose();
  }
  return c;
}

ContextVector ContextDistribution::sample(RngStream& rng) const {
  ContextVector c;
  c.mode = mode;
  c.arity = arity;
  c.stage_layout = layout;
  if (mode == ContextMode::kOneHot) {
    int dim = 0;
    for (const auto& sl : layout) dim += sl.size;
    c.values = Eigen::VectorXd::Zero(dim);
    for (std::size_t s = 0; s < stage_probs.size(); ++s) {
      int i = fcmdp::sample(CategoricalDist{stage_probs[s]}, rng);
      c.values[layout[s].begin + i] = 1.0;
    }
  } else {
    c.values = mdn_sample(mdn, rng);
  }
  return c;
}

EncoderReplay::EncoderReplay(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("EncoderReplay: zero capacity");
}

void EncoderReplay::push(const Eigen::VectorXd& obs_flat, const ContextVector& c) {
  if (obs_.size() < capacity_) {
    obs_.push_back(obs_flat);
    targets_.push_back(c.values);
  } else {
    obs_[next_] = obs_flat;
    targets_[next_] = c.values;
  }
  next_ = (next_ + 1) % capacity_;
}

const Eigen::VectorXd& EncoderReplay::obs(std::size_t i) const { return obs_.at(i); }
const Eigen::VectorXd& EncoderReplay::target(std::size_t i) const {
  return targets_.at(i);
}

EncoderEnsemble EncoderEnsemble::init(const EncoderSpec& spec, int k,
                                      std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("EncoderEnsemble: k must be >= 2");
  EncoderEnsemble e;
  e.spec_ = spec;
  MlpSpec mspec;
  mspec.input_dim = spec.input_dim;
  mspec.hidden_dims = spec.hidden;
  mspec.output_dim = spec.output_dim();
  for (int i = 0; i < k; ++i) {
    RngStream rng = RngStream::derive(seed, "member-" + std::to_string(i));
    e.members_.push_back(Mlp::init(mspec, rng, 0.01));
    e.opt_.push_back(AdamState::zeros(e.members_.back().params.size()));
  }
  return e;
}

ContextDistribution EncoderEnsemble::encode(int member,
                                            const Eigen::VectorXd& is_flat) const {
  if (is_flat.size() != spec_.input_dim)
    throw std::invalid_argument("encode: observation dim mismatch");
  Eigen::VectorXd y = forward(members_.at(member), is_flat);
  ContextDistribution d;
  d.mode = spec_.mode;
  d.arity = spec_.shape.arity();
  d.embedding_dim = spec_.embedding_dim;
  if (spec_.mode == ContextMode::kOneHot) {
    d.layout = spec_.shape.onehot_layout();
    for (const auto& sl : d.layout)
      d.stage_probs.push_back(softmax(y.segment(sl.begin, sl.size)));
  } else {
    d.layout = {{0, 0, spec_.embedding_dim}};
    d.mdn = mdn_from_raw(spec_.mdn_spec(), y);
  }
  return d;
}

std::vector<ContextVector> EncoderEnsemble::sample_contexts(
    const Eigen::VectorXd& is_flat, int n, RngStream& rng, bool stochastic) const {
  if (n < 2) throw std::invalid_argument("sample_contexts: n must be >= 2");
  std::vector<ContextVector> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ContextDistribution d = encode(i % size(), is_flat);
    if (spec_.mode == ContextMode::kOneHot && !stochastic)
      out.push_back(d.decode());
    else
      out.push_back(d.sample(rng));
  }
  return out;
}

double EncoderEnsemble::update(const EncoderReplay& replay, int minibatch, double lr,
                               std::vector<RngStream>& member_rngs) {
  if (replay.size() == 0) throw std::invalid_argument("encoder update: empty replay");
  if (member_rngs.size() != members_.size())
    throw std::invalid_argument("encoder update: need one rng per member");
  int m = static_cast<int>(std::min<std::size_t>(minibatch, replay.size()));
  double total_loss = 0.0;
  std::vector<StageSlice> layout = spec_.shape.onehot_layout();
  for (std::size_t i = 0; i < members_.size(); ++i) {
    Mlp& net = members_[i];
    Eigen::MatrixXd x(spec_.input_dim, m);
    std::vector<std::size_t> idx(m);
    for (int j = 0; j < m; ++j) {
      idx[j] = static_cast<std::size_t>(
          member_rngs[i].uniform_int(static_cast<int>(replay.size())));
      x.col(j) = replay.obs(idx[j]);
    }
    Tape tape;
    Eigen::MatrixXd y = forward(net, x, tape);
    Eigen::MatrixXd dy(net.spec.output_dim, m);
    double loss = 0.0;
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd& target = replay.target(idx[j]);
      if (spec_.mode == ContextMode::kOneHot) {
        // sum of per-stage cross entropies
        for (const auto& sl : layout) {
          loss += categorical_ce(y.col(j).segment(sl.begin, sl.size),
                                 target.segment(sl.begin, sl.size));
          dy.col(j).segment(sl.begin, sl.size) =
              categorical_ce_grad(y.col(j).segment(sl.begin, sl.size),
                                  target.segment(sl.begin, sl.size));
        }
      } else {
        loss += mdn_nll(mdn_from_raw(spec_.mdn_spec(), y.col(j)), target);
        dy.col(j) = mdn_nll_grad_raw(spec_.mdn_spec(), y.col(j), target);
      }
    }
    loss /= m;
    dy /= static_cast<double>(m);
    if (!std::isfinite(loss))
      throw std::runtime_error("encoder update: non-finite loss");
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.params.size());
    backward(tape, dy, grad);
    adam_step(net.params, grad, opt_[i], lr);
    total_loss += loss;
  }
  return total_loss / static_cast<double>(members_.size());
}

std::uint64_t EncoderEnsemble::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Mlp& m : members_) {
    std::uint64_t c = param_checksum(m.params);
    for (int b = 0; b < 8; ++b) {
      h ^= (c >> (8 * b)) & 0xff;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

void EncoderEnsemble::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("EncoderEnsemble::save: cannot open " + path);
  BinWriter w{os};
  write_header(w, "encoder-ensemble");
  w.i32(spec_.input_dim);
  w.u32(spec_.mode == ContextMode::kOneHot ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(spec_.shape.stage_arities.size()));
  for (int a : spec_.shape.stage_arities) w.i32(a);
  w.i32(spec_.embedding_dim);
  w.i32(spec_.mdn_components);
  w.f64(spec_.std_floor);
  w.u32(static_cast<std::uint32_t>(spec_.hidden.size()));
  for (int h : spec_.hidden) w.i32(h);
  w.u32(static_cast<std::uint32_t>(members_.size()));
  for (const Mlp& m : members_) write_mlp(w, m);
}

EncoderEnsemble EncoderEnsemble::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("EncoderEnsemble::load: cannot open " + path);
  BinReader r{is};
  if (read_header(r) != "encoder-ensemble")
    throw std::runtime_error("EncoderEnsemble::load: wrong checkpoint kind");
  EncoderEnsemble e;
  e.spec_.input_dim = r.i32();
  e.spec_.mode = r.u32() == 0 ? ContextMode::kOneHot : ContextMode::kEmbedding;
  std::uint32_t ns = r.u32();
  e.spec_.shape.stage_arities.resize(ns);
  for (auto& a : e.spec_.shape.stage_arities) a = r.i32();
  e.spec_.embedding_dim = r.i32();
  e.spec_.mdn_components = r.i32();
  e.spec_.std_floor = r.f64();
  std::uint32_t nh = r.u32();
  e.spec_.hidden.resize(nh);
  for (auto& h : e.spec_.hidden) h = r.i32();
  std::uint32_t k = r.u32();
  for (std::uint32_t i = 0; i < k; ++i) {
    e.members_.push_back(read_mlp(r));
    e.opt_.push_back(AdamState::zeros(e.members_.back().params.size()));
  }
  return e;
}

}  // namespace fcmdp
