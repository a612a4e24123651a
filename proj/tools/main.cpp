#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sparsebench/harness.hpp"
#include "sparsebench/report.hpp"
#include "validate.hpp"

using namespace sparsebench;

namespace {

int jobs_from_env() {
  if (const char* env = std::getenv("SPARSEBENCH_JOBS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) return parsed;
  }
  return 1;
}

int cmd_run(const std::string& config_path, const std::string& out_path, int jobs,
            const std::string& subset, const std::string& diabetes_path,
            bool include_bayes_p100) {
  RunConfig config = config_path.empty() ? RunConfig{} : parse_config_file(config_path);
  if (!diabetes_path.empty()) config.diabetes_path = diabetes_path;
  if (include_bayes_p100) config.include_bayes_p100 = true;

  std::vector<ExperimentSpec> specs = apply_subset(expand_grid(config), subset);
  if (specs.empty()) {
    std::cerr << "error: the grid is empty after applying --subset\n";
    return 1;
  }
  std::cerr << "running " << specs.size() << " experiments with " << jobs << " job(s)\n";

  const auto rows =
      run_all(specs, config, jobs, [](const ResultRow& row, std::size_t done, std::size_t total) {
        std::cerr << "[" << done << "/" << total << "] " << to_token(row.spec.model) << " on "
                  << to_token(row.spec.dataset);
        if (row.spec.dataset != DatasetKind::Diabetes)
          std::cerr << " rho=" << row.spec.rho << " snr=" << row.spec.snr << " p=" << row.spec.p;
        std::cerr << " seed=" << row.spec.seed;
        if (row.fit_time_s) std::cerr << " (" << *row.fit_time_s << " s)";
        if (!row.error.empty()) std::cerr << " ERROR: " << row.error;
        std::cerr << '\n';
      });
  persist(rows, out_path);

  std::size_t failed = 0;
  for (const auto& row : rows)
    if (!row.error.empty()) ++failed;
  std::cerr << "wrote " << rows.size() << " rows to " << out_path;
  if (failed > 0) std::cerr << " (" << failed << " failed; see the error column)";
  std::cerr << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparsebench: a benchmark engine for sparse linear regression"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute an experiment grid and persist rows to CSV");
  std::string config_path, out_path = "results.csv", subset, diabetes_path;
  int jobs = jobs_from_env();
  bool include_bayes_p100 = false;
  run->add_option("--config", config_path, "key = value config file (default: full synthetic grid)")
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "output CSV path (default results.csv)");
  run->add_option("--jobs", jobs, "worker threads (default: $SPARSEBENCH_JOBS or 1)");
  run->add_option("--subset", subset, "axis filters, e.g. \"p=20,model=lasso\"");
  run->add_option("--diabetes", diabetes_path, "diabetes CSV path (overrides the config)");
  run->add_flag("--include-bayes-p100", include_bayes_p100,
                "run Bayesian models at p >= 100 (skipped by default)");

  auto* report = app.add_subcommand("report", "aggregate a results CSV into summary tables");
  std::string in_path, out_dir = "reports";
  report->add_option("--in", in_path, "results CSV produced by `run`")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--out-dir", out_dir, "directory for the five table CSVs");

  app.add_subcommand("validate", "run the quick oracle/property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, out_path, jobs, subset, diabetes_path, include_bayes_p100);
    if (report->parsed()) {
      write_reports(load_rows(in_path), out_dir);
      std::cerr << "wrote summary_by_model.csv, calibration.csv, mse_by_rho.csv, "
                   "f1_by_snr.csv, time_by_p.csv to "
                << out_dir << '\n';
      return 0;
    }
    return run_validation_suite() == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
