#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "sparsebench/bayes.hpp"
#include "sparsebench/datagen.hpp"
#include "sparsebench/rng.hpp"

using namespace sparsebench;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Problem random_problem(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  Problem pr;
  pr.x.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) pr.x(i, j) = rng.normal();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta(0) = 2.0;
  pr.y = pr.x * beta;
  for (int i = 0; i < n; ++i) pr.y(i) += rng.normal();
  return pr;
}

// Fourth-order central stencil; h = 1e-5 keeps truncation and roundoff
// both far below the 1e-5 relative budget, including near the
// spike/slab mixture switchover where third derivatives are large.
double fd_gradient(const TargetDensity& target, const Eigen::VectorXd& point, int coord,
                   double h = 1e-5) {
  Eigen::VectorXd grad(target.dim);
  const auto value = [&](double offset) {
    Eigen::VectorXd q = point;
    q(coord) += offset;
    return target.logp_grad(q, grad);
  };
  return (value(-2 * h) - 8.0 * value(-h) + 8.0 * value(h) - value(2 * h)) / (12.0 * h);
}

void check_gradients(const TargetDensity& target, Rng& rng, int points) {
  for (int rep = 0; rep < points; ++rep) {
    Eigen::VectorXd point(target.dim);
    for (int i = 0; i < target.dim; ++i) point(i) = 0.5 * rng.normal();
    Eigen::VectorXd grad(target.dim);
    target.logp_grad(point, grad);
    for (int c = 0; c < target.dim; ++c) {
      const double numeric = fd_gradient(target, point, c);
      const double scale = std::max({1.0, std::abs(grad(c)), std::abs(numeric)});
      CHECK(std::abs(grad(c) - numeric) / scale < 1e-5);
    }
  }
}

double gaussian_loglik_at_zero(const Eigen::VectorXd& y, double sigma) {
  const double n = static_cast<double>(y.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - n * std::log(sigma) -
         y.squaredNorm() / (2.0 * sigma * sigma);
}

}  // namespace

TEST_SUITE("bayes") {

TEST_CASE("horseshoe gradients match finite differences") {
  for (int p : {2, 5, 20}) {
    const Problem pr = random_problem(30, p, 1000 + p);
    const TargetDensity target = horseshoe_target(pr.x, pr.y);
    CHECK(target.dim == 2 * p + 2);
    Rng rng(55 + p);
    check_gradients(target, rng, 20);
  }
}

TEST_CASE("spike-and-slab gradients match finite differences") {
  for (int p : {2, 5, 20}) {
    const Problem pr = random_problem(30, p, 2000 + p);
    const TargetDensity target = spike_slab_target(pr.x, pr.y);
    CHECK(target.dim == p + 2);
    Rng rng(77 + p);
    check_gradients(target, rng, 20);
  }
}

TEST_CASE("with no data the horseshoe log density is the prior plus jacobians") {
  const int p = 3;
  const TargetDensity prior_only = horseshoe_target(Eigen::MatrixXd(0, p), Eigen::VectorXd(0));
  Rng rng(5);
  Eigen::VectorXd point(2 * p + 2);
  for (int i = 0; i < point.size(); ++i) point(i) = 0.5 * rng.normal();
  Eigen::VectorXd grad(point.size());
  const double logp = prior_only.logp_grad(point, grad);

  // Direct evaluation of the same prior, written out independently.
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  double expected = 0.0;
  for (int j = 0; j < p; ++j) expected += -0.5 * point(j) * point(j) - 0.5 * log_two_pi;
  const auto half_cauchy = [&](double v, double s) {
    return std::log(2.0 / (std::numbers::pi * s)) - std::log(1.0 + v * v / (s * s));
  };
  for (int j = 0; j < p; ++j) expected += half_cauchy(std::exp(point(p + j)), 1.0) + point(p + j);
  expected += half_cauchy(std::exp(point(2 * p)), 1.0) + point(2 * p);
  expected += half_cauchy(std::exp(point(2 * p + 1)), 2.0) + point(2 * p + 1);
  CHECK(logp == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero scores give a pure-noise likelihood term") {
  const int p = 4;
  const Problem pr = random_problem(12, p, 31);
  const TargetDensity with_data = horseshoe_target(pr.x, pr.y);
  const TargetDensity no_data = horseshoe_target(Eigen::MatrixXd(0, p), Eigen::VectorXd(0));

  Rng rng(6);
  Eigen::VectorXd point(2 * p + 2);
  for (int i = 0; i < point.size(); ++i) point(i) = 0.3 * rng.normal();
  point.head(p).setZero();  // beta = 0 exactly
  Eigen::VectorXd grad(point.size());
  const double full = with_data.logp_grad(point, grad);
  const double prior = no_data.logp_grad(point, grad);
  const double sigma = std::exp(point(2 * p + 1));
  CHECK(full - prior == doctest::Approx(gaussian_loglik_at_zero(pr.y, sigma)).epsilon(1e-12));
}

TEST_CASE("the mixture collapses to the slab as pi approaches one") {
  const double pi = 1.0 / (1.0 + std::exp(-30.0));
  const double slab_var = 25.0;
  const double log_slab =
      -0.5 * (std::log(2.0 * std::numbers::pi * slab_var)) - 1.0 * 1.0 / (2.0 * slab_var);
  CHECK(std::abs(spike_slab_mixture_logpdf(1.0, pi) - log_slab) < 1e-9);
}

TEST_CASE("the mixture at the origin has its closed form") {
  const double pi = 0.35;
  const double expected = std::log(pi / (std::sqrt(2.0 * std::numbers::pi) * 5.0) +
                                   (1.0 - pi) / (std::sqrt(2.0 * std::numbers::pi) * 0.01));
  CHECK(spike_slab_mixture_logpdf(0.0, pi) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("constrained mappings invert the unconstraining transforms") {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const double sigma = std::exp(2.0 * rng.normal());
    CHECK(std::exp(std::log(sigma)) == doctest::Approx(sigma).epsilon(1e-12));
    const double pi = 1.0 / (1.0 + std::exp(-3.0 * rng.normal()));
    const double logit = std::log(pi / (1.0 - pi));
    CHECK(1.0 / (1.0 + std::exp(-logit)) == doctest::Approx(pi).epsilon(1e-12));
  }

  const int p = 4;
  Eigen::VectorXd point(2 * p + 2);
  for (int i = 0; i < point.size(); ++i) point(i) = rng.normal();
  const Eigen::VectorXd beta = horseshoe_beta(point, p);
  for (int j = 0; j < p; ++j) {
    const double expected = point(j) * std::exp(point(p + j)) * std::exp(point(2 * p));
    CHECK(beta(j) == doctest::Approx(expected).epsilon(1e-14));
  }
  const Eigen::VectorXd ss = spike_slab_beta(point, p);
  CHECK(ss == point.head(p));
}

TEST_CASE("hdi handles degenerate, gridded, and gaussian draws") {
  SUBCASE("constant draws give a zero-width interval") {
    const std::vector<double> draws(25, 3.7);
    const auto [lo, hi] = hdi(draws, 0.95);
    CHECK(lo == 3.7);
    CHECK(hi == 3.7);
  }
  SUBCASE("uniform grid ties break to the earliest window") {
    std::vector<double> draws(1000);
    for (int i = 0; i < 1000; ++i) draws[i] = static_cast<double>(i);
    const auto [lo, hi] = hdi(draws, 0.95);
    CHECK(lo == 0.0);
    CHECK(hi == 949.0);
  }
  SUBCASE("gaussian draws bracket the analytic quantiles") {
    Rng rng(12);
    std::vector<double> draws(100000);
    for (auto& d : draws) d = rng.normal();
    const auto [lo, hi] = hdi(draws, 0.95);
    CHECK(std::abs(lo + 1.96) < 0.05);
    CHECK(std::abs(hi - 1.96) < 0.05);
  }
  SUBCASE("the interval always contains at least ceil(0.95 N) draws") {
    Rng rng(13);
    for (int n : {20, 57, 300}) {
      std::vector<double> draws(n);
      for (auto& d : draws) d = std::exp(rng.normal());  // skewed
      const auto [lo, hi] = hdi(draws, 0.95);
      int inside = 0;
      for (double d : draws)
        if (d >= lo && d <= hi) ++inside;
      CHECK(inside >= static_cast<int>(std::ceil(0.95 * n)));
    }
  }
  SUBCASE("too few draws are rejected") {
    CHECK_THROWS(hdi({}, 0.95));
    CHECK_THROWS(hdi(std::vector<double>(19, 1.0), 0.95));
  }
}

TEST_CASE("fit_bayes is deterministic in its seed") {
  const Dataset ds = generate_dataset({Design::Independent, 5, 0.0}, 2.0, 42);
  SamplerConfig config;
  config.chains = 2;
  config.warmup = 100;
  config.draws = 200;
  config.seed = 7;
  const FitResult a = fit_bayes(BayesModel::Horseshoe, ds, config);
  const FitResult b = fit_bayes(BayesModel::Horseshoe, ds, config);
  CHECK(a.beta_hat == b.beta_hat);
  REQUIRE(a.posterior.has_value());
  for (std::size_t j = 0; j < a.posterior->size(); ++j) {
    CHECK((*a.posterior)[j].hdi_low == (*b.posterior)[j].hdi_low);
    CHECK((*a.posterior)[j].hdi_high == (*b.posterior)[j].hdi_high);
  }
  CHECK(a.divergences == b.divergences);
}

TEST_CASE("the horseshoe shrinks true zeros on a strong-signal problem") {
  Rng rng(91);
  Eigen::MatrixXd x(200, 10);
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 10; ++j) x(i, j) = rng.normal();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(10);
  beta(2) = 5.0;
  beta(7) = -4.0;
  const Eigen::VectorXd signal = x * beta;
  const double sigma = calibrate_noise(signal, 20.0);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y(i) = signal(i) + sigma * rng.normal();

  Dataset ds;
  ds.x_train = x;
  ds.y_train = y;
  ds.x_test = Eigen::MatrixXd::Zero(1, 10);
  ds.y_test = Eigen::VectorXd::Zero(1);

  SamplerConfig config;
  config.chains = 2;
  config.warmup = 500;
  config.draws = 1000;
  config.seed = 3;
  const FitResult fit = fit_bayes(BayesModel::Horseshoe, ds, config);
  for (int j = 0; j < 10; ++j) {
    if (j == 2 || j == 7) continue;
    CHECK(std::abs(fit.beta_hat(j)) < 0.1);
  }
  CHECK(fit.beta_hat(2) == doctest::Approx(5.0).epsilon(0.1));
  CHECK(fit.beta_hat(7) == doctest::Approx(-4.0).epsilon(0.1));
}

TEST_CASE("large signals escape horseshoe shrinkage, noise does not") {
  Rng rng(17);
  const int n = 100;
  Eigen::MatrixXd x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = rng.normal();

  SamplerConfig config;
  config.chains = 2;
  config.warmup = 500;
  config.draws = 1000;
  config.seed = 21;

  SUBCASE("huge true signal tracks ols") {
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = 50.0 * x(i, 0) + rng.normal();
    const double ols = (x.transpose() * x).inverse()(0, 0) * x.col(0).dot(y);
    Dataset ds{x, y, Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), std::nullopt, "t"};
    const FitResult fit = fit_bayes(BayesModel::Horseshoe, ds, config);
    CHECK(std::abs(fit.beta_hat(0) - ols) < 0.05 * std::abs(ols));
  }
  SUBCASE("pure noise is shrunk to nearly zero") {
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = rng.normal();
    Dataset ds{x, y, Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), std::nullopt, "t"};
    const FitResult fit = fit_bayes(BayesModel::Horseshoe, ds, config);
    CHECK(std::abs(fit.beta_hat(0)) < 0.1);
  }
}

}  // TEST_SUITE
