#include "sparsebench/bayes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sparsebench {

namespace {

constexpr double kTau0 = 1.0;        // global shrinkage prior scale
constexpr double kSigmaScale = 2.0;  // noise prior scale
constexpr double kSlabVar = 25.0;    // slab sd 5
constexpr double kSpikeVar = 1e-4;   // spike sd 0.01
constexpr double kPriorInclusion = 0.2;

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

// log C+(x; scale) for x > 0, as a function of x.
double half_cauchy_logpdf(double x, double scale) {
  return std::log(2.0 / (std::numbers::pi * scale)) - std::log1p((x / scale) * (x / scale));
}

// d/dx log C+(x; scale) = -2x / (scale^2 + x^2)
double half_cauchy_dlog(double x, double scale) {
  return -2.0 * x / (scale * scale + x * x);
}

double log_sigmoid(double u) {
  return u < 0.0 ? u - std::log1p(std::exp(u)) : -std::log1p(std::exp(-u));
}

double normal_logpdf(double x, double var) {
  return -0.5 * (kLogTwoPi + std::log(var)) - x * x / (2.0 * var);
}

}  // namespace

int horseshoe_dim(int p) { return 2 * p + 2; }

int spike_slab_dim(int p) { return p + 2; }

Eigen::VectorXd horseshoe_beta(const Eigen::VectorXd& point, int p) {
  const double tau = std::exp(point(2 * p));
  return point.head(p).array() * point.segment(p, p).array().exp() * tau;
}

Eigen::VectorXd spike_slab_beta(const Eigen::VectorXd& point, int p) {
  return point.head(p);
}

TargetDensity horseshoe_target(Eigen::MatrixXd x, Eigen::VectorXd y) {
  const int p = static_cast<int>(x.cols());
  const int dim = horseshoe_dim(p);
  auto logp_grad = [x = std::move(x), y = std::move(y), p](const Eigen::VectorXd& point,
                                                           Eigen::VectorXd& grad) -> double {
    const double n = static_cast<double>(x.rows());
    const auto eta = point.head(p).array();
    const auto log_local = point.segment(p, p).array();
    const double log_tau = point(2 * p);
    const double log_sigma = point(2 * p + 1);

    const Eigen::ArrayXd local = log_local.exp();
    const double tau = std::exp(log_tau);
    const double sigma = std::exp(log_sigma);
    const double sigma_sq = sigma * sigma;

    const Eigen::VectorXd beta = (eta * local * tau).matrix();
    const Eigen::VectorXd residual = y - x * beta;
    const double ssr = residual.squaredNorm();

    double logp = -0.5 * n * kLogTwoPi - n * log_sigma - ssr / (2.0 * sigma_sq);
    logp += -0.5 * eta.square().sum() - 0.5 * p * kLogTwoPi;
    for (int j = 0; j < p; ++j) logp += half_cauchy_logpdf(local(j), 1.0);
    logp += half_cauchy_logpdf(tau, kTau0);
    logp += half_cauchy_logpdf(sigma, kSigmaScale);
    logp += log_local.sum() + log_tau + log_sigma;  // exp-transform Jacobians

    const Eigen::ArrayXd beta_grad = (x.transpose() * residual).array() / sigma_sq;
    grad.resize(point.size());
    grad.head(p) = (beta_grad * local * tau - eta).matrix();
    for (int j = 0; j < p; ++j)
      grad(p + j) = beta_grad(j) * beta(j) + half_cauchy_dlog(local(j), 1.0) * local(j) + 1.0;
    grad(2 * p) = (beta_grad * beta.array()).sum() + half_cauchy_dlog(tau, kTau0) * tau + 1.0;
    grad(2 * p + 1) = -n + ssr / sigma_sq + half_cauchy_dlog(sigma, kSigmaScale) * sigma + 1.0;
    return logp;
  };
  return TargetDensity{dim, std::move(logp_grad)};
}

double spike_slab_mixture_logpdf(double beta_j, double pi) {
  const double log_slab = std::log(pi) + normal_logpdf(beta_j, kSlabVar);
  const double log_spike = std::log1p(-pi) + normal_logpdf(beta_j, kSpikeVar);
  const double m = std::max(log_slab, log_spike);
  return m + std::log(std::exp(log_slab - m) + std::exp(log_spike - m));
}

TargetDensity spike_slab_target(Eigen::MatrixXd x, Eigen::VectorXd y) {
  const int p = static_cast<int>(x.cols());
  const int dim = spike_slab_dim(p);
  const double beta_b = 1.0 / kPriorInclusion;  // Beta(1, 5) on the inclusion probability
  auto logp_grad = [x = std::move(x), y = std::move(y), p, beta_b](
                       const Eigen::VectorXd& point, Eigen::VectorXd& grad) -> double {
    const double n = static_cast<double>(x.rows());
    const auto beta = point.head(p);
    const double logit_pi = point(p);
    const double log_sigma = point(p + 1);

    const double log_pi = log_sigmoid(logit_pi);
    const double log_one_minus_pi = log_sigmoid(-logit_pi);
    const double pi = std::exp(log_pi);
    const double sigma = std::exp(log_sigma);
    const double sigma_sq = sigma * sigma;

    const Eigen::VectorXd residual = y - x * beta;
    const double ssr = residual.squaredNorm();

    double logp = -0.5 * n * kLogTwoPi - n * log_sigma - ssr / (2.0 * sigma_sq);

    grad.resize(point.size());
    const Eigen::VectorXd likelihood_grad = x.transpose() * residual / sigma_sq;
    double mix_dlogit = 0.0;
    for (int j = 0; j < p; ++j) {
      const double log_slab = log_pi + normal_logpdf(beta(j), kSlabVar);
      const double log_spike = log_one_minus_pi + normal_logpdf(beta(j), kSpikeVar);
      const double m = std::max(log_slab, log_spike);
      const double log_mix = m + std::log(std::exp(log_slab - m) + std::exp(log_spike - m));
      logp += log_mix;
      const double w_slab = std::exp(log_slab - log_mix);
      const double w_spike = std::exp(log_spike - log_mix);
      grad(j) = likelihood_grad(j) - beta(j) * (w_slab / kSlabVar + w_spike / kSpikeVar);
      // d log_mix / d logit_pi with the sigmoid Jacobian folded in.
      mix_dlogit += (1.0 - pi) * w_slab - pi * w_spike;
    }

    // Beta(1, 5) prior on pi with its normalizer, plus the logistic Jacobian.
    logp += std::log(beta_b) + (beta_b - 1.0) * log_one_minus_pi;
    logp += log_pi + log_one_minus_pi;
    grad(p) = mix_dlogit - (beta_b - 1.0) * pi + (1.0 - 2.0 * pi);

    logp += half_cauchy_logpdf(sigma, kSigmaScale) + log_sigma;
    grad(p + 1) = -n + ssr / sigma_sq + half_cauchy_dlog(sigma, kSigmaScale) * sigma + 1.0;
    return logp;
  };
  return TargetDensity{dim, std::move(logp_grad)};
}

std::pair<double, double> hdi(std::vector<double> draws, double prob) {
  if (!(prob > 0.0) || !(prob < 1.0)) throw std::invalid_argument("hdi: prob must lie in (0, 1)");
  const auto n = draws.size();
  const auto required = static_cast<std::size_t>(std::ceil(1.0 / (1.0 - prob) - 1e-9));
  if (n < required)
    throw std::invalid_argument("hdi: need at least " + std::to_string(required) + " draws");

  std::sort(draws.begin(), draws.end());
  const auto window =
      std::min(n, static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n) - 1e-9)));
  std::size_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + window <= n; ++i) {
    const double width = draws[i + window - 1] - draws[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {draws[best], draws[best + window - 1]};
}

FitResult fit_bayes(BayesModel model, const Dataset& dataset, const SamplerConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int p = static_cast<int>(dataset.x_train.cols());

  const TargetDensity target = model == BayesModel::Horseshoe
                                   ? horseshoe_target(dataset.x_train, dataset.y_train)
                                   : spike_slab_target(dataset.x_train, dataset.y_train);
  const PosteriorDraws draws = run_chains(target, config);

  // Per-chain coefficient draws on the constrained scale.
  std::vector<Eigen::MatrixXd> beta_chains;
  beta_chains.reserve(draws.samples.size());
  for (const auto& chain : draws.samples) {
    Eigen::MatrixXd betas(chain.rows(), p);
    for (Eigen::Index d = 0; d < chain.rows(); ++d) {
      const Eigen::VectorXd point = chain.row(d);
      betas.row(d) = (model == BayesModel::Horseshoe ? horseshoe_beta(point, p)
                                                     : spike_slab_beta(point, p))
                         .transpose();
    }
    beta_chains.push_back(std::move(betas));
  }

  const Eigen::Index total =
      static_cast<Eigen::Index>(beta_chains.size()) * beta_chains.front().rows();
  FitResult result;
  result.beta_hat.resize(p);
  std::vector<CoefficientSummary> summaries(p);
  std::vector<double> pooled(static_cast<std::size_t>(total));
  for (int j = 0; j < p; ++j) {
    std::size_t k = 0;
    double sum = 0.0;
    for (const auto& betas : beta_chains)
      for (Eigen::Index d = 0; d < betas.rows(); ++d, ++k) {
        pooled[k] = betas(d, j);
        sum += pooled[k];
      }
    const auto [low, high] = hdi(pooled, 0.95);
    summaries[j].mean = sum / static_cast<double>(total);
    summaries[j].hdi_low = low;
    summaries[j].hdi_high = high;
    result.beta_hat(j) = summaries[j].mean;
  }
  result.posterior = std::move(summaries);

  int divergences = 0;
  for (int d : draws.divergence_count) divergences += d;
  result.divergences = divergences;
  result.max_rhat = split_rhat(beta_chains).maxCoeff();
  result.fit_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace sparsebench
