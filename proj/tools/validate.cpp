#include "validate.hpp"

#include <Eigen/QR>
#include <cmath>
#include <cstdio>
#include <string>

#include "sparsebench/bayes.hpp"
#include "sparsebench/datagen.hpp"
#include "sparsebench/sampler.hpp"
#include "sparsebench/solvers.hpp"

namespace {

using namespace sparsebench;

int g_failures = 0;

void check(bool ok, const std::string& name, const std::string& detail) {
  std::printf("[%s] %s -- %s\n", ok ? "ok" : "FAIL", name.c_str(), detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

Eigen::MatrixXd random_matrix(int n, int p, Rng& rng) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

Eigen::VectorXd random_vector(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

void check_lasso_equals_ols() {
  Rng rng(11);
  const Eigen::MatrixXd x = random_matrix(50, 8, rng);
  const Eigen::VectorXd y = random_vector(50, rng);
  const CdResult cd = coordinate_descent(x, y, {0.0, 1.0});
  const double gap = (cd.beta - fit_ols(x, y).beta_hat).cwiseAbs().maxCoeff();
  check(cd.converged && gap < 1e-6, "lasso at lambda=0 equals ols", "gap " + fmt(gap));
}

void check_soft_threshold() {
  Rng rng(12);
  const int n = 60, p = 6;
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(n, p, rng)).householderQ() *
      Eigen::MatrixXd::Identity(n, p);
  const Eigen::MatrixXd x = std::sqrt(static_cast<double>(n)) * q;
  const Eigen::VectorXd y = random_vector(n, rng);
  const CdResult cd = coordinate_descent(x, y, {0.3, 1.0});
  double worst = 0.0;
  for (int j = 0; j < p; ++j) {
    const double z = x.col(j).dot(y) / n;
    worst = std::max(worst,
                     std::abs(cd.beta(j) - std::copysign(std::max(std::abs(z) - 0.3, 0.0), z)));
  }
  check(worst < 1e-8, "orthonormal-design lasso equals soft threshold", "gap " + fmt(worst));
}

void check_ridge_loocv() {
  Rng rng(13);
  const int n = 20, p = 4;
  const Eigen::MatrixXd x = random_matrix(n, p, rng);
  const Eigen::VectorXd y = x * Eigen::VectorXd::Ones(p) + 0.3 * random_vector(n, rng);
  const std::vector<double> grid{0.05, 0.5};
  const auto closed = ridge_loocv_errors(x, y, grid);
  double worst = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd xi(n - 1, p);
      Eigen::VectorXd yi(n - 1);
      int r = 0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        xi.row(r) = x.row(k);
        yi(r++) = y(k);
      }
      const Eigen::VectorXd bi =
          (xi.transpose() * xi + 2.0 * n * grid[g] * Eigen::MatrixXd::Identity(p, p))
              .ldlt()
              .solve(xi.transpose() * yi);
      const double err = y(i) - x.row(i).dot(bi);
      sse += err * err;
    }
    worst = std::max(worst, std::abs(closed[g] - sse / n));
  }
  check(worst < 1e-8, "ridge loocv equals brute-force refits", "gap " + fmt(worst));
}

void check_cv_kkt() {
  Rng rng(14);
  const Eigen::MatrixXd x = sample_design(build_covariance({Design::Toeplitz, 12, 0.6}), 60, rng);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(12);
  beta(2) = 3;
  beta(9) = -2;
  const Eigen::VectorXd y = x * beta + random_vector(60, rng);
  CvPlan plan;
  plan.fold_seed = 3;
  const FitResult fit = fit_lasso_cv(x, y, plan);
  const double resid = kkt_residual(x, y, fit.beta_hat, *fit.chosen_penalty);
  const double scale = std::max(1.0, (x.transpose() * y).cwiseAbs().maxCoeff() / 60.0);
  check(fit.converged && resid <= 1e-7 * scale, "cv lasso fit satisfies the KKT conditions",
        "residual " + fmt(resid));
}

void check_gradients() {
  const int p = 5;
  Rng data_rng(15);
  const Eigen::MatrixXd x = random_matrix(30, p, data_rng);
  const Eigen::VectorXd y = x.col(0) * 2.0 + random_vector(30, data_rng);
  double worst = 0.0;
  for (const TargetDensity& target : {horseshoe_target(x, y), spike_slab_target(x, y)}) {
    Rng rng(16);
    Eigen::VectorXd grad(target.dim), probe(target.dim);
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd point(target.dim);
      for (int i = 0; i < target.dim; ++i) point(i) = 0.5 * rng.normal();
      target.logp_grad(point, grad);
      for (int c = 0; c < target.dim; ++c) {
        const double h = 1e-5;
        const auto value = [&](double offset) {
          Eigen::VectorXd q = point;
          q(c) += offset;
          return target.logp_grad(q, probe);
        };
        const double numeric =
            (value(-2 * h) - 8.0 * value(-h) + 8.0 * value(h) - value(2 * h)) / (12.0 * h);
        const double scale = std::max({1.0, std::abs(grad(c)), std::abs(numeric)});
        worst = std::max(worst, std::abs(grad(c) - numeric) / scale);
      }
    }
  }
  check(worst < 1e-5, "posterior gradients match finite differences", "max rel err " + fmt(worst));
}

void check_hdi() {
  Rng rng(17);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = rng.normal();
  const auto [lo, hi] = hdi(draws, 0.95);
  check(std::abs(lo + 1.96) < 0.05 && std::abs(hi - 1.96) < 0.05,
        "hdi brackets the gaussian quantiles", "(" + fmt(lo) + ", " + fmt(hi) + ")");
}

void check_sampler() {
  TargetDensity gaussian{3, [](const Eigen::VectorXd& q, Eigen::VectorXd& grad) {
                           grad = -q;
                           return -0.5 * q.squaredNorm();
                         }};
  SamplerConfig config;
  config.chains = 2;
  config.warmup = 300;
  config.draws = 700;
  config.seed = 18;
  const PosteriorDraws draws = run_chains(gaussian, config);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int j = 0; j < 3; ++j) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& chain : draws.samples) {
      sum += chain.col(j).sum();
      sum_sq += chain.col(j).squaredNorm();
    }
    const double n = 2.0 * 700.0;
    const double mean = sum / n;
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_var = std::max(worst_var, std::abs(sum_sq / n - mean * mean - 1.0));
  }
  check(worst_mean < 0.15 && worst_var < 0.2, "nuts recovers gaussian moments",
        "max |mean| " + fmt(worst_mean) + ", max |var-1| " + fmt(worst_var));
}

void check_datagen() {
  const Eigen::MatrixXd cov = build_covariance({Design::Toeplitz, 3, 0.5});
  const bool toeplitz_ok = std::abs(cov(0, 2) - 0.25) < 1e-15;
  Rng rng(19);
  const Eigen::MatrixXd x = sample_design(build_covariance({Design::Block, 10, 0.6}), 5000, rng);
  const SparseBeta sb = sample_sparse_beta(10, rng);
  const Eigen::VectorXd signal = x * sb.beta_star;
  const double sigma = calibrate_noise(signal, 2.0);
  const double var = (signal.array() - signal.mean()).square().mean();
  const double snr_err = std::abs(var / (sigma * sigma) - 2.0);
  check(toeplitz_ok && snr_err < 1e-9, "covariance and snr calibration",
        "snr deviation " + fmt(snr_err));
}

}  // namespace

int run_validation_suite() {
  g_failures = 0;
  check_datagen();
  check_lasso_equals_ols();
  check_soft_threshold();
  check_ridge_loocv();
  check_cv_kkt();
  check_gradients();
  check_hdi();
  check_sampler();
  std::printf("%s\n", g_failures == 0 ? "validation passed" : "validation FAILED");
  return g_failures;
}
