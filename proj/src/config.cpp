#include "fcmdp/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fcmdp {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: bad boolean value for " + key + ": '" + v + "'");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& key, const std::string& v, F item) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(item(key, part));
  }
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  return to_list<int>(key, v, to_int);
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::resolved_seeds() const {
  return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
}

GridOptions ExperimentConfig::grid_options(std::uint64_t env_seed) const {
  GridOptions opts;
  opts.seed = env_seed;
  opts.context_mode = mode();
  opts.continuous_ir = continuous_ir();
  opts.noise_scale = env_noise_scale;
  opts.is_step_budget = env_is_budget;
  opts.ir_step_budget = env_ir_budget;
  opts.embedding_dim = env_embedding_dim;
  return opts;
}

double ExperimentConfig::resolved_delta() const {
  if (deploy_delta_set) return deploy.delta;
  return 0.5;  // discrete-IR default; continuous heads calibrate at deploy time
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " has an empty key or value");

    if (key == "task") {
      if (val != "cooking" && val != "walls" && val != "button")
        throw ConfigError("config: unknown task '" + val + "'");
      cfg.task = val;
    } else if (key == "method") {
      if (val != "disam" && val != "disam-reward" && val != "full-rl" &&
          val != "random-cam" && val != "sampled-context")
        throw ConfigError("config: unknown method '" + val + "'");
      cfg.method = val;
    } else if (key == "context_mode") {
      if (val != "onehot" && val != "embedding")
        throw ConfigError("config: context_mode must be onehot or embedding");
      cfg.context_mode = val;
    } else if (key == "ir_head") {
      if (val != "categorical" && val != "gaussian")
        throw ConfigError("config: ir_head must be categorical or gaussian");
      cfg.ir_head = val;
    } else if (key == "seed") {
      cfg.seed = to_u64(key, val);
    } else if (key == "seeds") {
      cfg.seeds = to_list<std::uint64_t>(key, val, to_u64);
    } else if (key == "out") {
      cfg.out = val;
    } else if (key == "env.noise_scale") {
      cfg.env_noise_scale = to_double(key, val);
    } else if (key == "env.is_step_budget") {
      cfg.env_is_budget = to_int(key, val);
    } else if (key == "env.ir_step_budget") {
      cfg.env_ir_budget = to_int(key, val);
    } else if (key == "env.embedding_dim") {
      cfg.env_embedding_dim = to_int(key, val);
    } else if (key == "demos.episodes") {
      cfg.demos_episodes = to_int(key, val);
    } else if (key == "bc.epochs") {
      cfg.bc.epochs = to_int(key, val);
    } else if (key == "bc.lr") {
      cfg.bc.lr = to_double(key, val);
    } else if (key == "bc.minibatch") {
      cfg.bc.minibatch = to_int(key, val);
    } else if (key == "bc.holdout_fraction") {
      cfg.bc.holdout_fraction = to_double(key, val);
    } else if (key == "bc.hidden") {
      cfg.bc.hidden = to_int_list(key, val);
    } else if (key == "ppo.gamma") {
      cfg.train.ppo.gamma = to_double(key, val);
    } else if (key == "ppo.gae_lambda") {
      cfg.train.ppo.gae_lambda = to_double(key, val);
    } else if (key == "ppo.clip_ratio") {
      cfg.train.ppo.clip_ratio = to_double(key, val);
    } else if (key == "ppo.lr") {
      cfg.train.ppo.lr = to_double(key, val);
    } else if (key == "ppo.entropy_coef") {
      cfg.train.ppo.entropy_coef = to_double(key, val);
    } else if (key == "ppo.value_coef") {
      cfg.train.ppo.value_coef = to_double(key, val);
    } else if (key == "ppo.max_grad_norm") {
      cfg.train.ppo.max_grad_norm = to_double(key, val);
    } else if (key == "ppo.epochs") {
      cfg.train.ppo.epochs = to_int(key, val);
    } else if (key == "ppo.minibatch") {
      cfg.train.ppo.minibatch = to_int(key, val);
    } else if (key == "train.iterations") {
      cfg.train.iterations = to_int(key, val);
    } else if (key == "train.rollout_steps") {
      cfg.train.rollout_steps = to_int(key, val);
    } else if (key == "train.encoder_updates") {
      cfg.train.encoder_updates = to_int(key, val);
    } else if (key == "train.encoder_batch") {
      cfg.train.encoder_batch = to_int(key, val);
    } else if (key == "train.encoder_lr") {
      cfg.train.encoder_lr = to_double(key, val);
    } else if (key == "train.replay_capacity") {
      cfg.train.replay_capacity = static_cast<std::size_t>(to_u64(key, val));
    } else if (key == "train.ensemble_k") {
      cfg.train.ensemble_k = to_int(key, val);
    } else if (key == "train.mdn_components") {
      cfg.train.mdn_components = to_int(key, val);
    } else if (key == "train.switch_threshold") {
      cfg.train.switch_threshold = to_double(key, val);
    } else if (key == "train.alpha") {
      cfg.train.alpha = to_double(key, val);
    } else if (key == "train.beta") {
      cfg.train.beta = to_double(key, val);
    } else if (key == "train.reward_floor") {
      cfg.train.reward_floor = to_double(key, val);
    } else if (key == "train.loss_mc_samples") {
      cfg.train.loss_mc_samples = to_int(key, val);
    } else if (key == "train.hidden") {
      cfg.train.hidden = to_int_list(key, val);
    } else if (key == "train.checkpoint_every") {
      cfg.checkpoint_every = to_int(key, val);
    } else if (key == "deploy.delta") {
      cfg.deploy.delta = to_double(key, val);
      cfg.deploy_delta_set = true;
    } else if (key == "deploy.n") {
      cfg.deploy.n = to_int(key, val);
    } else if (key == "deploy.max_steps") {
      cfg.deploy.max_steps = to_int(key, val);
    } else if (key == "deploy.greedy_ir") {
      cfg.deploy.greedy_ir = to_bool(key, val);
    } else if (key == "deploy.pooled_sampling") {
      cfg.deploy.pooled_sampling = to_bool(key, val);
    } else if (key == "deploy.stochastic_encoder_sampling") {
      cfg.deploy.stochastic_encoder_sampling = to_bool(key, val);
    } else if (key == "deploy.episodes") {
      cfg.deploy_episodes = to_int(key, val);
    } else if (key == "noise.scales") {
      cfg.noise_scales = to_list<double>(key, val, to_double);
    } else if (key == "noise.episodes") {
      cfg.noise_episodes = to_int(key, val);
    } else if (key == "paths.demos") {
      cfg.demos_path = val;
    } else if (key == "paths.ir_checkpoint") {
      cfg.ir_ckpt = val;
    } else if (key == "paths.is_checkpoint") {
      cfg.is_ckpt = val;
    } else if (key == "paths.ensemble") {
      cfg.ensemble_ckpt = val;
    } else if (key == "paths.joint_checkpoint") {
      cfg.joint_ckpt = val;
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MissingInputError("config file not found: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, double>)
      out += fmt(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "task = " << c.task << "\n";
  os << "method = " << c.method << "\n";
  os << "context_mode = " << c.context_mode << "\n";
  os << "ir_head = " << c.ir_head << "\n";
  os << "seed = " << c.seed << "\n";
  os << "seeds = " << join(c.resolved_seeds()) << "\n";
  if (!c.out.empty()) os << "out = " << c.out << "\n";
  os << "env.noise_scale = " << fmt(c.env_noise_scale) << "\n";
  os << "env.is_step_budget = " << c.env_is_budget << "\n";
  os << "env.ir_step_budget = " << c.env_ir_budget << "\n";
  os << "env.embedding_dim = " << c.env_embedding_dim << "\n";
  os << "demos.episodes = " << c.demos_episodes << "\n";
  os << "bc.epochs = " << c.bc.epochs << "\n";
  os << "bc.lr = " << fmt(c.bc.lr) << "\n";
  os << "bc.minibatch = " << c.bc.minibatch << "\n";
  os << "bc.holdout_fraction = " << fmt(c.bc.holdout_fraction) << "\n";
  os << "bc.hidden = " << join(c.bc.hidden) << "\n";
  os << "ppo.gamma = " << fmt(c.train.ppo.gamma) << "\n";
  os << "ppo.gae_lambda = " << fmt(c.train.ppo.gae_lambda) << "\n";
  os << "ppo.clip_ratio = " << fmt(c.train.ppo.clip_ratio) << "\n";
  os << "ppo.lr = " << fmt(c.train.ppo.lr) << "\n";
  os << "ppo.entropy_coef = " << fmt(c.train.ppo.entropy_coef) << "\n";
  os << "ppo.value_coef = " << fmt(c.train.ppo.value_coef) << "\n";
  os << "ppo.max_grad_norm = " << fmt(c.train.ppo.max_grad_norm) << "\n";
  os << "ppo.epochs = " << c.train.ppo.epochs << "\n";
  os << "ppo.minibatch = " << c.train.ppo.minibatch << "\n";
  os << "train.iterations = " << c.train.iterations << "\n";
  os << "train.rollout_steps = " << c.train.rollout_steps << "\n";
  os << "train.encoder_updates = " << c.train.encoder_updates << "\n";
  os << "train.encoder_batch = " << c.train.encoder_batch << "\n";
  os << "train.encoder_lr = " << fmt(c.train.encoder_lr) << "\n";
  os << "train.replay_capacity = " << c.train.replay_capacity << "\n";
  os << "train.ensemble_k = " << c.train.ensemble_k << "\n";
  os << "train.mdn_components = " << c.train.mdn_components << "\n";
  os << "train.switch_threshold = " << fmt(c.train.switch_threshold) << "\n";
  os << "train.alpha = " << fmt(c.train.alpha) << "\n";
  os << "train.beta = " << fmt(c.train.beta) << "\n";
  os << "train.reward_floor = " << fmt(c.train.reward_floor) << "\n";
  os << "train.loss_mc_samples = " << c.train.loss_mc_samples << "\n";
  os << "train.hidden = " << join(c.train.hidden) << "\n";
  os << "train.checkpoint_every = " << c.checkpoint_every << "\n";
  os << "deploy.delta = " << fmt(c.deploy_delta_set ? c.deploy.delta : c.resolved_delta())
     << "\n";
  os << "deploy.n = " << c.deploy.n << "\n";
  os << "deploy.max_steps = " << c.deploy.max_steps << "\n";
  os << "deploy.greedy_ir = " << (c.deploy.greedy_ir ? "true" : "false") << "\n";
  os << "deploy.pooled_sampling = " << (c.deploy.pooled_sampling ? "true" : "false")
     << "\n";
  os << "deploy.stochastic_encoder_sampling = "
     << (c.deploy.stochastic_encoder_sampling ? "true" : "false") << "\n";
  os << "deploy.episodes = " << c.deploy_episodes << "\n";
  os << "noise.scales = " << join(c.noise_scales) << "\n";
  os << "noise.episodes = " << c.noise_episodes << "\n";
  if (!c.demos_path.empty()) os << "paths.demos = " << c.demos_path << "\n";
  if (!c.ir_ckpt.empty()) os << "paths.ir_checkpoint = " << c.ir_ckpt << "\n";
  if (!c.is_ckpt.empty()) os << "paths.is_checkpoint = " << c.is_ckpt << "\n";
  if (!c.ensemble_ckpt.empty()) os << "paths.ensemble = " << c.ensemble_ckpt << "\n";
  if (!c.joint_ckpt.empty()) os << "paths.joint_checkpoint = " << c.joint_ckpt << "\n";
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string s = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int log_level() {
  static int level = [] {
    const char* env = std::getenv("FCMDP_LOG");
    if (!env) return 1;
    return std::atoi(env);
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[fcmdp] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[fcmdp:debug] " << msg << "\n";
}

}  // namespace fcmdp
