#pragma once

#include <Eigen/Dense>

#include <variant>

#include "fcmdp/rng.hpp"

namespace fcmdp {

// ---------------------------------------------------------------------------
// Categorical
// ---------------------------------------------------------------------------

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
double log_sum_exp(const Eigen::VectorXd& v);

/// -sum_i target_i * log softmax(logits)_i
double categorical_ce(const Eigen::VectorXd& logits, const Eigen::VectorXd& target);

/// d/dlogits of categorical_ce; for a normalized target this is p - target.
Eigen::VectorXd categorical_ce_grad(const Eigen::VectorXd& logits,
                                    const Eigen::VectorXd& target);

double categorical_entropy(const Eigen::VectorXd& probs);

/// KL(p||q) with both sides floored at `floor` and renormalized, so zero
/// entries never produce infinities.
double categorical_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                      double floor = 1e-8);

// ---------------------------------------------------------------------------
// Diagonal Gaussian
// ---------------------------------------------------------------------------

struct GaussianDist {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

/// Raw head output [mean(d), raw_std(d)] -> distribution with
/// std = std_floor + exp(raw_std).
GaussianDist gaussian_from_raw(const Eigen::VectorXd& raw, double std_floor);

double gaussian_nll(const GaussianDist& d, const Eigen::VectorXd& x);

/// d nll / d raw, raw as in gaussian_from_raw.
Eigen::VectorXd gaussian_nll_grad_raw(const Eigen::VectorXd& raw,
                                      const Eigen::VectorXd& x, double std_floor);

double gaussian_entropy(const GaussianDist& d);

/// Closed-form KL for diagonal Gaussians.
double gaussian_kl(const GaussianDist& p, const GaussianDist& q);

Eigen::VectorXd gaussian_sample(const GaussianDist& d, RngStream& rng);

// ---------------------------------------------------------------------------
// Mixture density head
// ---------------------------------------------------------------------------

struct MdnSpec {
  int components = 5;
  int dim = 1;
  double std_floor = 1e-3;

  int raw_size() const { return components * (1 + 2 * dim); }
  bool operator==(const MdnSpec&) const = default;
};

struct MdnDist {
  Eigen::VectorXd weights;  // K, on the simplex
  Eigen::MatrixXd means;    // K x d
  Eigen::MatrixXd stds;     // K x d, >= std_floor
};

/// Raw layout: [weight logits (K), means (K*d), raw stds (K*d)], row-major in
/// components.
MdnDist mdn_from_raw(const MdnSpec& spec, const Eigen::VectorXd& raw);

/// -log sum_k w_k N(x; mu_k, diag sigma_k^2)
double mdn_nll(const MdnDist& d, const Eigen::VectorXd& x);

Eigen::VectorXd mdn_nll_grad_raw(const MdnSpec& spec, const Eigen::VectorXd& raw,
                                 const Eigen::VectorXd& x);

Eigen::VectorXd mdn_sample(const MdnDist& d, RngStream& rng);

/// Mixture mean sum_k w_k mu_k.
Eigen::VectorXd mdn_mean(const MdnDist& d);

// ---------------------------------------------------------------------------
// Action distributions
// ---------------------------------------------------------------------------

struct CategoricalDist {
  Eigen::VectorXd probs;
};

using ActionDistribution = std::variant<CategoricalDist, GaussianDist>;

double kl_divergence(const ActionDistribution& p, const ActionDistribution& q);
int sample(const CategoricalDist& d, RngStream& rng);
int argmax(const CategoricalDist& d);

}  // namespace fcmdp
