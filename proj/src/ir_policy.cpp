#include "fcmdp/ir_policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "fcmdp/checkpoint.hpp"

namespace fcmdp {

DemoDataset collect_demos(FcmdpEnv& env, int n_episodes, std::uint64_t seed) {
  DemoDataset d;
  d.env_id = env.task_id();
  d.seed = seed;
  d.mode = env.context_mode();
  d.continuous = !env.ir_action_space().discrete;
  d.obs_dim = env.ir_obs().flat_dim();
  d.ctx_dim = static_cast<int>(env.context_gt().values.size());
  d.n_skills = env.n_ir_skills();
  if (d.continuous) {
    d.prototypes.resize(d.n_skills, 2);
    for (int s = 0; s < d.n_skills; ++s)
      d.prototypes.row(s) = env.skill_prototype(s).transpose();
  }
  for (int ep = 0; ep < n_episodes; ++ep) {
    env.reset(RngStream::derive_seed(seed, "demo-ep-" + std::to_string(ep)));
    ContextVector c = env.context_gt();
    int t = 0;
    while (!env.done()) {
      DemoRecord rec;
      rec.episode = ep;
      rec.t = t++;
      rec.obs = env.ir_obs().flat();
      rec.skill = env.expert_skill();
      rec.context = c.values;
      if (d.continuous) {
        rec.action2 = env.expert_action_continuous();
        env.step_ir(Eigen::VectorXd(rec.action2));
      } else {
        env.step_ir(rec.skill);
      }
      d.records.push_back(std::move(rec));
    }
    if (!env.success())
      throw std::runtime_error("collect_demos: scripted expert failed episode " +
                               std::to_string(ep) + " on " + d.env_id);
  }
  return d;
}

namespace {

void print_g17(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void save_demos(const DemoDataset& d, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_demos: cannot open " + path);
  os << "# fcmdp-demos v1\n";
  os << "# env=" << d.env_id << " mode=" << (d.mode == ContextMode::kOneHot ? "onehot" : "embedding")
     << " continuous=" << (d.continuous ? 1 : 0) << " obs_dim=" << d.obs_dim
     << " ctx_dim=" << d.ctx_dim << " n_skills=" << d.n_skills << " seed=" << d.seed
     << "\n";
  if (d.continuous) {
    os << "# prototypes";
    for (int s = 0; s < d.prototypes.rows(); ++s)
      for (int j = 0; j < 2; ++j) {
        os << ' ';
        print_g17(os, d.prototypes(s, j));
      }
    os << "\n";
  }
  for (const auto& r : d.records) {
    os << r.episode << ' ' << r.t;
    for (Eigen::Index i = 0; i < r.obs.size(); ++i) {
      os << ' ';
      print_g17(os, r.obs[i]);
    }
    if (d.continuous) {
      os << ' ';
      print_g17(os, r.action2[0]);
      os << ' ';
      print_g17(os, r.action2[1]);
    } else {
      os << ' ' << r.skill;
    }
    for (Eigen::Index i = 0; i < r.context.size(); ++i) {
      os << ' ';
      print_g17(os, r.context[i]);
    }
    os << '\n';
  }
}

DemoDataset load_demos(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_demos: cannot open " + path);
  DemoDataset d;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# fcmdp-demos", 0) != 0)
    throw std::runtime_error("load_demos: not a demo file: " + path);
  if (!std::getline(is, line)) throw std::runtime_error("load_demos: missing header");
  {
    auto grab = [&](const std::string& key) {
      auto pos = line.find(key + "=");
      if (pos == std::string::npos)
        throw std::runtime_error("load_demos: missing header key " + key);
      return line.substr(pos + key.size() + 1);
    };
    d.env_id = grab("env").substr(0, grab("env").find(' '));
    d.mode = grab("mode").rfind("embedding", 0) == 0 ? ContextMode::kEmbedding
                                                     : ContextMode::kOneHot;
    d.continuous = std::stoi(grab("continuous")) != 0;
    d.obs_dim = std::stoi(grab("obs_dim"));
    d.ctx_dim = std::stoi(grab("ctx_dim"));
    d.n_skills = std::stoi(grab("n_skills"));
    d.seed = std::stoull(grab("seed"));
  }
  if (d.continuous) {
    if (!std::getline(is, line) || line.rfind("# prototypes", 0) != 0)
      throw std::runtime_error("load_demos: missing prototypes");
    std::istringstream ss(line.substr(std::string("# prototypes").size()));
    d.prototypes.resize(d.n_skills, 2);
    for (int s = 0; s < d.n_skills; ++s)
      for (int j = 0; j < 2; ++j) ss >> d.prototypes(s, j);
  }
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    DemoRecord r;
    ss >> r.episode >> r.t;
    r.obs.resize(d.obs_dim);
    for (int i = 0; i < d.obs_dim; ++i) ss >> r.obs[i];
    if (d.continuous)
      ss >> r.action2[0] >> r.action2[1];
    else
      ss >> r.skill;
    r.context.resize(d.ctx_dim);
    for (int i = 0; i < d.ctx_dim; ++i) ss >> r.context[i];
    if (!ss) throw std::runtime_error("load_demos: malformed record line");
    d.records.push_back(std::move(r));
  }
  return d;
}

ActionDistribution IrPolicy::action_dist(const Eigen::VectorXd& obs_flat,
                                         const ContextVector& c) const {
  if (obs_flat.size() != obs_dim || c.values.size() != ctx_dim)
    throw std::invalid_argument("IrPolicy::action_dist: dim mismatch");
  Eigen::VectorXd x(obs_dim + ctx_dim);
  x << obs_flat, c.values;
  Eigen::VectorXd y = forward(net, x);
  if (continuous) return gaussian_from_raw(y, std_floor);
  return CategoricalDist{softmax(y)};
}

ActionDistribution IrPolicy::action_dist(const IrObservation& obs,
                                         const ContextVector& c) const {
  return action_dist(obs.flat(), c);
}

int IrPolicy::greedy_skill(const Eigen::VectorXd& obs_flat, const ContextVector& c) const {
  return argmax(std::get<CategoricalDist>(action_dist(obs_flat, c)));
}

Eigen::VectorXd IrPolicy::greedy_action2(const Eigen::VectorXd& obs_flat,
                                         const ContextVector& c) const {
  return std::get<GaussianDist>(action_dist(obs_flat, c)).mean;
}

void IrPolicy::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("IrPolicy::save: cannot open " + path);
  BinWriter w{os};
  write_header(w, "ir-policy");
  w.u32(continuous ? 1 : 0);
  w.i32(n_actions);
  w.i32(action_dim);
  w.i32(obs_dim);
  w.i32(ctx_dim);
  w.f64(std_floor);
  w.mat(prototypes);
  write_mlp(w, net);
}

IrPolicy IrPolicy::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("IrPolicy::load: cannot open " + path);
  BinReader r{is};
  if (read_header(r) != "ir-policy")
    throw std::runtime_error("IrPolicy::load: wrong checkpoint kind");
  IrPolicy p;
  p.continuous = r.u32() != 0;
  p.n_actions = r.i32();
  p.action_dim = r.i32();
  p.obs_dim = r.i32();
  p.ctx_dim = r.i32();
  p.std_floor = r.f64();
  p.prototypes = r.mat();
  p.net = read_mlp(r);
  return p;
}

namespace {

int nearest_prototype(const Eigen::MatrixXd& protos, const Eigen::Vector2d& a) {
  Eigen::Index best = 0;
  (protos.rowwise() - a.transpose()).rowwise().squaredNorm().minCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

double action_accuracy(const IrPolicy& policy, const DemoDataset& data,
                       std::size_t begin, std::size_t end) {
  if (begin >= end) return 0.0;
  int hits = 0;
  ContextVector c;
  c.mode = data.mode;
  for (std::size_t i = begin; i < end; ++i) {
    const DemoRecord& r = data.records[i];
    c.values = r.context;
    if (policy.continuous) {
      Eigen::Vector2d mean = policy.greedy_action2(r.obs, c);
      hits += nearest_prototype(data.prototypes, mean) ==
              nearest_prototype(data.prototypes, r.action2);
    } else {
      hits += policy.greedy_skill(r.obs, c) == r.skill;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(end - begin);
}

BcResult train_bc(const DemoDataset& data, const BcConfig& cfg, std::uint64_t seed) {
  if (data.records.empty()) throw std::invalid_argument("train_bc: empty dataset");
  IrPolicy policy;
  policy.continuous = data.continuous;
  policy.n_actions = data.continuous ? 0 : data.n_skills;
  policy.action_dim = data.continuous ? 2 : 0;
  policy.obs_dim = data.obs_dim;
  policy.ctx_dim = data.ctx_dim;
  policy.prototypes = data.prototypes;

  MlpSpec spec;
  spec.input_dim = data.obs_dim + data.ctx_dim;
  spec.hidden_dims = cfg.hidden;
  spec.output_dim = data.continuous ? 4 : data.n_skills;
  RngStream init_rng = RngStream::derive(seed, "bc-init");
  policy.net = Mlp::init(spec, init_rng, 0.01);

  // holdout split by episode so evaluation states are unseen
  int last_episode = data.records.back().episode;
  int holdout_from_ep =
      std::max(0, static_cast<int>((1.0 - cfg.holdout_fraction) * (last_episode + 1)));
  std::size_t split = data.records.size();
  for (std::size_t i = 0; i < data.records.size(); ++i)
    if (data.records[i].episode >= holdout_from_ep) {
      split = i;
      break;
    }
  if (split == 0) split = data.records.size();  // tiny datasets train on everything

  std::vector<int> order(split);
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle_rng = RngStream::derive(seed, "bc-shuffle");
  AdamState opt = AdamState::zeros(policy.net.params.size());
  Eigen::VectorXd grad(policy.net.params.size());

  BcResult out;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = split; i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < split; start += cfg.minibatch) {
      std::size_t m = std::min<std::size_t>(cfg.minibatch, split - start);
      Eigen::MatrixXd x(spec.input_dim, m);
      for (std::size_t j = 0; j < m; ++j) {
        const DemoRecord& r = data.records[order[start + j]];
        x.col(j) << r.obs, r.context;
      }
      Tape tape;
      Eigen::MatrixXd y = forward(policy.net, x, tape);
      Eigen::MatrixXd dy(spec.output_dim, m);
      double loss = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const DemoRecord& r = data.records[order[start + j]];
        if (data.continuous) {
          loss += gaussian_nll(gaussian_from_raw(y.col(j), policy.std_floor), r.action2);
          dy.col(j) = gaussian_nll_grad_raw(y.col(j), r.action2, policy.std_floor) /
                      static_cast<double>(m);
        } else {
          Eigen::VectorXd target = Eigen::VectorXd::Zero(data.n_skills);
          target[r.skill] = 1.0;
          loss += categorical_ce(y.col(j), target);
          dy.col(j) = categorical_ce_grad(y.col(j), target) / static_cast<double>(m);
        }
      }
      loss /= static_cast<double>(m);
      if (!std::isfinite(loss))
        throw std::runtime_error("train_bc: non-finite loss at epoch " +
                                 std::to_string(epoch));
      grad.setZero();
      backward(tape, dy, grad);
      adam_step(policy.net.params, grad, opt, cfg.lr);
      epoch_loss += loss * static_cast<double>(m);
    }
    out.epoch_losses.push_back(epoch_loss / static_cast<double>(split));
  }
  out.holdout_accuracy =
      split < data.records.size()
          ? action_accuracy(policy, data, split, data.records.size())
          : action_accuracy(policy, data, 0, data.records.size());
  out.policy = std::move(policy);
  return out;
}

}  // namespace fcmdp
