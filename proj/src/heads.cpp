#include "fcmdp/heads.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fcmdp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

double categorical_ce(const Eigen::VectorXd& logits, const Eigen::VectorXd& target) {
  if (logits.size() != target.size())
    throw std::invalid_argument("categorical_ce: arity mismatch");
  double lse = log_sum_exp(logits);
  return -(target.array() * (logits.array() - lse)).sum();
}

Eigen::VectorXd categorical_ce_grad(const Eigen::VectorXd& logits,
                                    const Eigen::VectorXd& target) {
  return target.sum() * softmax(logits) - target;
}

double categorical_entropy(const Eigen::VectorXd& probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    if (probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
  return h;
}

double categorical_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                      double floor) {
  if (p.size() != q.size()) throw std::invalid_argument("categorical_kl: arity mismatch");
  Eigen::ArrayXd pf = p.array().max(floor);
  Eigen::ArrayXd qf = q.array().max(floor);
  pf /= pf.sum();
  qf /= qf.sum();
  return (pf * (pf / qf).log()).sum();
}

GaussianDist gaussian_from_raw(const Eigen::VectorXd& raw, double std_floor) {
  Eigen::Index d = raw.size() / 2;
  GaussianDist out;
  out.mean = raw.head(d);
  out.std = std_floor + raw.tail(d).array().exp();
  return out;
}

double gaussian_nll(const GaussianDist& d, const Eigen::VectorXd& x) {
  if (x.size() != d.mean.size()) throw std::invalid_argument("gaussian_nll: dim mismatch");
  Eigen::ArrayXd z = (x - d.mean).array() / d.std.array();
  return 0.5 * (z.square().sum() + x.size() * kLog2Pi) + d.std.array().log().sum();
}

Eigen::VectorXd gaussian_nll_grad_raw(const Eigen::VectorXd& raw,
                                      const Eigen::VectorXd& x, double std_floor) {
  Eigen::Index d = raw.size() / 2;
  GaussianDist g = gaussian_from_raw(raw, std_floor);
  Eigen::VectorXd grad(raw.size());
  Eigen::ArrayXd diff = (g.mean - x).array();
  Eigen::ArrayXd var = g.std.array().square();
  grad.head(d) = (diff / var).matrix();
  // d nll / d std = 1/std - diff^2/std^3; d std / d raw = exp(raw) = std - floor
  Eigen::ArrayXd dstd = 1.0 / g.std.array() - diff.square() / (var * g.std.array());
  grad.tail(d) = (dstd * (g.std.array() - std_floor)).matrix();
  return grad;
}

double gaussian_entropy(const GaussianDist& d) {
  return 0.5 * d.mean.size() * (1.0 + kLog2Pi) + d.std.array().log().sum();
}

double gaussian_kl(const GaussianDist& p, const GaussianDist& q) {
  Eigen::ArrayXd vp = p.std.array().square();
  Eigen::ArrayXd vq = q.std.array().square();
  Eigen::ArrayXd diff = (p.mean - q.mean).array();
  return ((q.std.array() / p.std.array()).log() + (vp + diff.square()) / (2.0 * vq) - 0.5)
      .sum();
}

Eigen::VectorXd gaussian_sample(const GaussianDist& d, RngStream& rng) {
  Eigen::VectorXd z(d.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return d.mean + (d.std.array() * z.array()).matrix();
}

MdnDist mdn_from_raw(const MdnSpec& spec, const Eigen::VectorXd& raw) {
  if (raw.size() != spec.raw_size()) throw std::invalid_argument("mdn: raw size mismatch");
  int K = spec.components, d = spec.dim;
  MdnDist out;
  out.weights = softmax(raw.head(K));
  out.means = Eigen::Map<const Eigen::MatrixXd>(raw.data() + K, K, d);
  out.stds = spec.std_floor +
             Eigen::Map<const Eigen::MatrixXd>(raw.data() + K + K * d, K, d).array().exp();
  return out;
}

namespace {

/// log w_k + log N(x; mu_k, sigma_k) for every component.
Eigen::VectorXd mdn_component_logliks(const MdnDist& d, const Eigen::VectorXd& x) {
  int K = static_cast<int>(d.weights.size());
  Eigen::VectorXd g(K);
  for (int k = 0; k < K; ++k) {
    Eigen::ArrayXd z = (x.transpose().array() - d.means.row(k).array()) /
                       d.stds.row(k).array();
    g[k] = std::log(d.weights[k]) -
           0.5 * (z.square().sum() + x.size() * kLog2Pi) -
           d.stds.row(k).array().log().sum();
  }
  return g;
}

}  // namespace

double mdn_nll(const MdnDist& d, const Eigen::VectorXd& x) {
  return -log_sum_exp(mdn_component_logliks(d, x));
}

Eigen::VectorXd mdn_nll_grad_raw(const MdnSpec& spec, const Eigen::VectorXd& raw,
                                 const Eigen::VectorXd& x) {
  int K = spec.components, d = spec.dim;
  MdnDist dist = mdn_from_raw(spec, raw);
  Eigen::VectorXd g = mdn_component_logliks(dist, x);
  Eigen::VectorXd post = softmax(g);  // responsibilities r_k

  Eigen::VectorXd grad(spec.raw_size());
  grad.head(K) = dist.weights - post;  // through the weight softmax
  Eigen::Map<Eigen::MatrixXd> gmu(grad.data() + K, K, d);
  Eigen::Map<Eigen::MatrixXd> gstd(grad.data() + K + K * d, K, d);
  for (int k = 0; k < K; ++k) {
    Eigen::ArrayXd diff = dist.means.row(k).transpose().array() - x.array();
    Eigen::ArrayXd sd = dist.stds.row(k).transpose().array();
    Eigen::ArrayXd var = sd.square();
    gmu.row(k) = (post[k] * diff / var).transpose();
    Eigen::ArrayXd dstd = post[k] * (1.0 / sd - diff.square() / (var * sd));
    gstd.row(k) = (dstd * (sd - spec.std_floor)).transpose();
  }
  return grad;
}

Eigen::VectorXd mdn_sample(const MdnDist& d, RngStream& rng) {
  double u = rng.uniform();
  int k = 0;
  double acc = 0.0;
  for (; k < d.weights.size() - 1; ++k) {
    acc += d.weights[k];
    if (u < acc) break;
  }
  Eigen::VectorXd z(d.means.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return d.means.row(k).transpose() + (d.stds.row(k).transpose().array() * z.array()).matrix();
}

Eigen::VectorXd mdn_mean(const MdnDist& d) {
  return d.means.transpose() * d.weights;
}

double kl_divergence(const ActionDistribution& p, const ActionDistribution& q) {
  if (p.index() != q.index())
    throw std::invalid_argument("kl_divergence: distribution kind mismatch");
  if (std::holds_alternative<CategoricalDist>(p))
    return categorical_kl(std::get<CategoricalDist>(p).probs,
                          std::get<CategoricalDist>(q).probs);
  return gaussian_kl(std::get<GaussianDist>(p), std::get<GaussianDist>(q));
}

int sample(const CategoricalDist& d, RngStream& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d.probs.size() - 1; ++i) {
    acc += d.probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(d.probs.size() - 1);
}

int argmax(const CategoricalDist& d) {
  Eigen::Index i = 0;
  d.probs.maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace fcmdp
