#pragma once

#include <utility>

#include "sparsebench/dataset.hpp"
#include "sparsebench/fit_result.hpp"
#include "sparsebench/sampler.hpp"

namespace sparsebench {

enum class BayesModel { Horseshoe, SpikeSlab };

/// Unconstrained dimension of the horseshoe posterior: p coefficient
/// scores, p log local scales, log global scale, log noise scale.
int horseshoe_dim(int p);

/// Unconstrained dimension of the spike-and-slab posterior: p raw
/// coefficients, logit inclusion probability, log noise scale.
int spike_slab_dim(int p);

/// Log joint density and gradient of the horseshoe regression posterior
/// on the unconstrained point [eta, log_lambda, log_tau, log_sigma]:
/// Gaussian likelihood with beta_j = eta_j exp(log_lambda_j) exp(log_tau),
/// standard-normal eta, half-Cauchy(1) local scales, half-Cauchy(1)
/// global scale, half-Cauchy(2) noise scale, plus exp-transform
/// Jacobians.
TargetDensity horseshoe_target(Eigen::MatrixXd x, Eigen::VectorXd y);

/// Log joint density and gradient of the continuous spike-and-slab
/// posterior on [beta, logit_pi, log_sigma]: Gaussian likelihood, per
/// coefficient a two-component normal mixture with slab sd 5 and spike
/// sd 0.01 (indicators marginalized), Beta(1, 5) prior on the inclusion
/// probability, half-Cauchy(2) noise scale, plus transform Jacobians.
TargetDensity spike_slab_target(Eigen::MatrixXd x, Eigen::VectorXd y);

/// Maps an unconstrained point to the coefficient vector.
Eigen::VectorXd horseshoe_beta(const Eigen::VectorXd& point, int p);
Eigen::VectorXd spike_slab_beta(const Eigen::VectorXd& point, int p);

/// Marginal log density of one coefficient under the spike/slab mixture
/// at inclusion probability pi.
double spike_slab_mixture_logpdf(double beta_j, double pi);

/// Narrowest interval of ceil(prob * N) consecutive sorted draws; ties
/// break toward the earliest window. Requires at least ceil(1/(1-prob))
/// draws.
std::pair<double, double> hdi(std::vector<double> draws, double prob = 0.95);

/// Fits a Bayesian model by NUTS: runs the chains, maps draws to the
/// coefficient scale, and fills beta_hat with posterior means and
/// `posterior` with per-coefficient means and 95% HDIs. Divergence
/// totals and the worst coefficient split-Rhat are attached for
/// diagnostics.
FitResult fit_bayes(BayesModel model, const Dataset& dataset, const SamplerConfig& config);

}  // namespace sparsebench
