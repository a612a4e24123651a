#include "sparsebench/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>

namespace sparsebench {

namespace {

constexpr double kDivergenceThreshold = 1000.0;  // energy error triggering a divergence
constexpr double kInitJitterSd = 0.1;

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;  // both -inf (or a nan already present)
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double kinetic_energy(const Eigen::VectorXd& momentum) { return 0.5 * momentum.squaredNorm(); }

double total_energy(const PhasePoint& state) {
  return -state.logp + kinetic_energy(state.momentum);
}

Eigen::VectorXd draw_momentum(int dim, Rng& rng) {
  Eigen::VectorXd momentum(dim);
  for (int i = 0; i < dim; ++i) momentum(i) = rng.normal();
  return momentum;
}

struct TreeStats {
  double energy0 = 0.0;
  double sum_metro = 0.0;
  int n_leapfrog = 0;
  bool divergent = false;
};

struct Subtree {
  PhasePoint back;   // flow-earliest state in the subtree
  PhasePoint front;  // flow-latest state
  Eigen::VectorXd proposal;
  double proposal_logp = 0.0;
  Eigen::VectorXd proposal_grad;
  double log_weight = -std::numeric_limits<double>::infinity();
  bool stop = false;  // divergence or internal U-turn
};

bool is_uturn(const PhasePoint& back, const PhasePoint& front) {
  const Eigen::VectorXd span = front.position - back.position;
  return span.dot(front.momentum) < 0.0 || span.dot(back.momentum) < 0.0;
}

Subtree build_tree(const TargetDensity& target, int depth, const PhasePoint& from, double step,
                   int direction, TreeStats& stats, Rng& rng) {
  if (depth == 0) {
    Subtree leaf;
    PhasePoint next = leapfrog(target, from, direction > 0 ? step : -step);
    const double energy = total_energy(next);
    const double delta = energy - stats.energy0;
    ++stats.n_leapfrog;
    const bool divergent = !std::isfinite(delta) || delta > kDivergenceThreshold;
    if (std::isfinite(delta)) stats.sum_metro += std::min(1.0, std::exp(-delta));
    leaf.log_weight = divergent ? -std::numeric_limits<double>::infinity() : -delta;
    leaf.stop = divergent;
    stats.divergent |= divergent;
    leaf.proposal = next.position;
    leaf.proposal_logp = next.logp;
    leaf.proposal_grad = next.grad;
    leaf.back = next;
    leaf.front = std::move(next);
    return leaf;
  }

  Subtree first = build_tree(target, depth - 1, from, step, direction, stats, rng);
  if (first.stop) return first;

  const PhasePoint& edge = direction > 0 ? first.front : first.back;
  Subtree second = build_tree(target, depth - 1, edge, step, direction, stats, rng);
  if (second.stop) {
    first.stop = true;
    return first;
  }

  Subtree merged;
  merged.back = direction > 0 ? std::move(first.back) : std::move(second.back);
  merged.front = direction > 0 ? std::move(second.front) : std::move(first.front);
  merged.log_weight = log_sum_exp(first.log_weight, second.log_weight);

  // Multinomial sampling between the two halves.
  bool take_second = false;
  if (std::isfinite(second.log_weight)) {
    const double prob = std::exp(second.log_weight - merged.log_weight);
    take_second = rng.uniform01() < prob;
  }
  Subtree& chosen = take_second ? second : first;
  merged.proposal = std::move(chosen.proposal);
  merged.proposal_logp = chosen.proposal_logp;
  merged.proposal_grad = std::move(chosen.proposal_grad);

  merged.stop = is_uturn(merged.back, merged.front);
  return merged;
}

struct ChainOutput {
  Eigen::MatrixXd draws;
  int divergences = 0;
  double step_size = 0.0;
  double accept_mean = 0.0;
};

std::uint64_t chain_seed(std::uint64_t base, int chain) {
  std::uint64_t state = base;
  std::uint64_t seed = 0;
  for (int i = 0; i <= chain; ++i) seed = splitmix64(state);
  return seed;
}

TransitionResult transition_from(const TargetDensity& target, Eigen::VectorXd position,
                                 double logp, Eigen::VectorXd grad, double step, Rng& rng,
                                 int max_tree_depth) {
  TransitionResult result;
  result.position = std::move(position);
  result.logp = logp;
  result.grad = std::move(grad);

  PhasePoint initial{result.position, draw_momentum(target.dim, rng), logp, result.grad};
  TreeStats stats;
  stats.energy0 = total_energy(initial);
  if (!std::isfinite(stats.energy0)) {
    result.divergent = true;
    return result;
  }

  PhasePoint back = initial;
  PhasePoint front = std::move(initial);
  double log_weight_total = 0.0;  // the initial point carries weight exp(0)

  for (int depth = 0; depth < max_tree_depth; ++depth) {
    const int direction = rng.uniform01() < 0.5 ? -1 : 1;
    Subtree subtree = build_tree(target, depth, direction > 0 ? front : back, step, direction,
                                 stats, rng);
    if (subtree.stop) break;

    // Biased progressive update favoring the fresh half of the trajectory.
    bool take = subtree.log_weight > log_weight_total;
    if (!take && std::isfinite(subtree.log_weight))
      take = rng.uniform01() < std::exp(subtree.log_weight - log_weight_total);
    if (take) {
      result.position = std::move(subtree.proposal);
      result.logp = subtree.proposal_logp;
      result.grad = std::move(subtree.proposal_grad);
    }
    log_weight_total = log_sum_exp(log_weight_total, subtree.log_weight);
    if (direction > 0)
      front = std::move(subtree.front);
    else
      back = std::move(subtree.back);
    result.tree_depth = depth + 1;

    if (is_uturn(back, front)) break;
  }

  result.divergent = stats.divergent;
  result.n_leapfrog = stats.n_leapfrog;
  result.accept_stat = stats.n_leapfrog > 0 ? stats.sum_metro / stats.n_leapfrog : 0.0;
  return result;
}

ChainOutput run_single_chain(const TargetDensity& target, const SamplerConfig& config,
                             int chain_index) {
  Rng rng(chain_seed(config.seed, chain_index));

  Eigen::VectorXd position(target.dim);
  for (int i = 0; i < target.dim; ++i) position(i) = kInitJitterSd * rng.normal();
  Eigen::VectorXd grad(target.dim);
  double logp = target.logp_grad(position, grad);

  double step = find_reasonable_step(target, position, rng);
  DualAveraging averager(step, config.target_accept);

  int warmup_divergences = 0;
  for (int m = 0; m < config.warmup; ++m) {
    TransitionResult tr = transition_from(target, std::move(position), logp, std::move(grad),
                                          averager.current(), rng, config.max_tree_depth);
    averager.update(tr.accept_stat);
    warmup_divergences += tr.divergent ? 1 : 0;
    position = std::move(tr.position);
    logp = tr.logp;
    grad = std::move(tr.grad);
  }
  if (warmup_divergences > 0.9 * config.warmup)
    throw std::runtime_error(
        "run_chains: chain " + std::to_string(chain_index) + " diverged on " +
        std::to_string(warmup_divergences) + "/" + std::to_string(config.warmup) +
        " warmup transitions; the target is likely misspecified or non-differentiable");

  ChainOutput out;
  out.step_size = averager.adapted();
  out.draws.resize(config.draws, target.dim);
  double accept_sum = 0.0;
  for (int d = 0; d < config.draws; ++d) {
    TransitionResult tr = transition_from(target, std::move(position), logp, std::move(grad),
                                          out.step_size, rng, config.max_tree_depth);
    out.draws.row(d) = tr.position.transpose();
    out.divergences += tr.divergent ? 1 : 0;
    accept_sum += tr.accept_stat;
    position = std::move(tr.position);
    logp = tr.logp;
    grad = std::move(tr.grad);
  }
  out.accept_mean = config.draws > 0 ? accept_sum / config.draws : 0.0;
  return out;
}

}  // namespace

PhasePoint make_phase_point(const TargetDensity& target, Eigen::VectorXd position,
                            Eigen::VectorXd momentum) {
  PhasePoint state;
  state.grad.resize(target.dim);
  state.logp = target.logp_grad(position, state.grad);
  state.position = std::move(position);
  state.momentum = std::move(momentum);
  return state;
}

PhasePoint leapfrog(const TargetDensity& target, const PhasePoint& state, double step) {
  PhasePoint next;
  next.momentum = state.momentum + 0.5 * step * state.grad;
  next.position = state.position + step * next.momentum;
  next.grad.resize(target.dim);
  next.logp = target.logp_grad(next.position, next.grad);
  next.momentum += 0.5 * step * next.grad;
  return next;
}

TransitionResult nuts_transition(const Eigen::VectorXd& position, double step,
                                 const TargetDensity& target, Rng& rng, int max_tree_depth) {
  Eigen::VectorXd grad(target.dim);
  const double logp = target.logp_grad(position, grad);
  return transition_from(target, position, logp, std::move(grad), step, rng, max_tree_depth);
}

DualAveraging::DualAveraging(double step_init, double target_accept)
    : mu_(std::log(step_init)),
      target_(target_accept),
      log_step_(std::log(step_init)),
      log_step_avg_(std::log(step_init)) {}

void DualAveraging::update(double accept_stat) {
  constexpr double kGamma = 0.05;
  constexpr double kT0 = 10.0;
  constexpr double kKappa = 0.75;
  ++count_;
  const double m = static_cast<double>(count_);
  h_bar_ = (1.0 - 1.0 / (m + kT0)) * h_bar_ + (target_ - accept_stat) / (m + kT0);
  log_step_ = mu_ - std::sqrt(m) / kGamma * h_bar_;
  const double weight = std::pow(m, -kKappa);
  log_step_avg_ = weight * log_step_ + (1.0 - weight) * log_step_avg_;
}

double DualAveraging::current() const { return std::exp(log_step_); }

double DualAveraging::adapted() const { return std::exp(log_step_avg_); }

double dual_averaging_adapt(const std::vector<double>& accept_stats, double target_accept,
                            double step_init) {
  DualAveraging averager(step_init, target_accept);
  for (double a : accept_stats) averager.update(a);
  return averager.adapted();
}

double find_reasonable_step(const TargetDensity& target, const Eigen::VectorXd& position,
                            Rng& rng) {
  PhasePoint state = make_phase_point(target, position, draw_momentum(target.dim, rng));
  if (!std::isfinite(state.logp)) return 1.0;
  const double energy0 = total_energy(state);

  const auto ratio_at = [&](double step) {
    const PhasePoint next = leapfrog(target, state, step);
    const double delta = energy0 - total_energy(next);
    return std::isfinite(delta) ? std::exp(delta) : 0.0;
  };

  double step = 1.0;
  double ratio = ratio_at(step);
  const bool grow = ratio > 0.5;
  for (int iter = 0; iter < 100; ++iter) {
    step *= grow ? 2.0 : 0.5;
    ratio = ratio_at(step);
    if (grow ? ratio <= 0.5 : ratio >= 0.5) break;
    if (step > 1e7 || step < 1e-10) break;
  }
  return step;
}

PosteriorDraws run_chains(const TargetDensity& target, const SamplerConfig& config) {
  if (config.chains < 1) throw std::invalid_argument("run_chains: chains must be >= 1");
  if (config.warmup < 1 || config.draws < 1)
    throw std::invalid_argument("run_chains: warmup and draws must be >= 1");
  if (!(config.target_accept > 0.0) || !(config.target_accept < 1.0))
    throw std::invalid_argument("run_chains: target_accept must lie in (0, 1)");
  if (target.dim < 1 || !target.logp_grad)
    throw std::invalid_argument("run_chains: invalid target");

  std::vector<ChainOutput> outputs(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);

  if (config.chains == 1) {
    outputs[0] = run_single_chain(target, config, 0);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(config.chains);
    for (int c = 0; c < config.chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          outputs[c] = run_single_chain(target, config, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  PosteriorDraws draws;
  for (auto& out : outputs) {
    draws.samples.push_back(std::move(out.draws));
    draws.divergence_count.push_back(out.divergences);
    draws.adapted_step_size.push_back(out.step_size);
    draws.accept_stat_mean.push_back(out.accept_mean);
  }
  return draws;
}

Eigen::VectorXd split_rhat(const std::vector<Eigen::MatrixXd>& chains) {
  if (chains.empty()) throw std::invalid_argument("split_rhat: no chains");
  const Eigen::Index dim = chains[0].cols();
  const Eigen::Index chain_draws = chains[0].rows();
  for (const auto& c : chains)
    if (c.cols() != dim || c.rows() != chain_draws)
      throw std::invalid_argument("split_rhat: chains must share shape");

  // Two segments per chain, or four from a lone chain.
  const int splits = chains.size() == 1 ? 4 : 2;
  const Eigen::Index seg_len = chain_draws / splits;
  const Eigen::Index n_segments = static_cast<Eigen::Index>(chains.size()) * splits;
  if (n_segments < 4 || seg_len < 2)
    throw std::invalid_argument("split_rhat: need at least 4 segments of length >= 2");

  Eigen::VectorXd rhat(dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    Eigen::VectorXd seg_mean(n_segments), seg_var(n_segments);
    Eigen::Index s = 0;
    for (const auto& chain : chains) {
      for (int k = 0; k < splits; ++k, ++s) {
        const auto segment = chain.col(d).segment(k * seg_len, seg_len);
        const double mean = segment.mean();
        seg_mean(s) = mean;
        seg_var(s) = (segment.array() - mean).square().sum() / static_cast<double>(seg_len - 1);
      }
    }
    const double grand_mean = seg_mean.mean();
    const double between = static_cast<double>(seg_len) / (n_segments - 1) *
                           (seg_mean.array() - grand_mean).square().sum();
    const double within = seg_var.mean();
    if (within <= 0.0) {
      rhat(d) = between > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
      continue;
    }
    const double n = static_cast<double>(seg_len);
    const double var_plus = (n - 1.0) / n * within + between / n;
    rhat(d) = std::sqrt(var_plus / within);
  }
  return rhat;
}

}  // namespace sparsebench
