#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sparsebench/results.hpp"
#include "sparsebench/sampler.hpp"

namespace sparsebench {

/// Axes and knobs of one benchmark run. Defaults reproduce the full
/// synthetic grid; the independent design always pins rho to 0
/// regardless of the rho axis, and Bayesian models are skipped at
/// p >= 100 unless include_bayes_p100 is set.
struct RunConfig {
  std::vector<DatasetKind> datasets{DatasetKind::Independent, DatasetKind::Block,
                                    DatasetKind::Toeplitz};
  std::vector<ModelKind> models{ModelKind::Ols,       ModelKind::Ridge,
                                ModelKind::Lasso,     ModelKind::ElasticNet,
                                ModelKind::Horseshoe, ModelKind::SpikeSlab};
  std::vector<double> rhos{0.0, 0.3, 0.6, 0.9};
  std::vector<double> snrs{0.5, 1.0, 2.0, 5.0};
  std::vector<int> ps{20, 50, 100};
  std::vector<std::uint64_t> seeds{42, 123, 456, 789, 1024};
  std::uint64_t base_seed = 0;
  bool include_bayes_p100 = false;
  std::string diabetes_path;
  SamplerConfig sampler;  // per-experiment seeds are derived, the seed field here is ignored
};

/// Parses the flat key = value config format (see configs/ for the
/// documented keys). Unknown keys and empty axes are errors. Keys not
/// present keep their defaults.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Deterministic Cartesian expansion in (dataset, model, rho, snr, p,
/// seed) lexicographic order (axes sorted canonically first).
std::vector<ExperimentSpec> expand_grid(const RunConfig& config);

/// Stream seed for everything data-side of an experiment: a stable hash
/// of the canonical encoding of (dataset, rho, snr, p, seed, base_seed).
/// The model is deliberately excluded so every model in a grid cell
/// consumes the identical dataset.
std::uint64_t derive_seed(const ExperimentSpec& spec, std::uint64_t base_seed);

/// Keeps specs matching every key in a filter string such as
/// "p=20,model=lasso" (repeated keys OR together). Valid keys:
/// dataset, model, rho, snr, p, seed.
std::vector<ExperimentSpec> apply_subset(const std::vector<ExperimentSpec>& specs,
                                         const std::string& filters);

/// Generates (or loads) the dataset, fits the model, and computes every
/// applicable metric. Failures are captured in the row's error column
/// rather than thrown.
ResultRow run_experiment(const ExperimentSpec& spec, const RunConfig& config);

using ProgressFn = std::function<void(const ResultRow& row, std::size_t done, std::size_t total)>;

/// Executes the experiments on `jobs` worker threads (1 = serial). Row
/// order matches the input order regardless of the job count.
std::vector<ResultRow> run_all(const std::vector<ExperimentSpec>& specs, const RunConfig& config,
                               int jobs, const ProgressFn& progress = nullptr);

}  // namespace sparsebench
