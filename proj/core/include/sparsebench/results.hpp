#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sparsebench {

enum class DatasetKind { Independent, Block, Toeplitz, Diabetes };
enum class ModelKind { Ols, Ridge, Lasso, ElasticNet, Horseshoe, SpikeSlab };

std::string to_token(DatasetKind kind);
std::string to_token(ModelKind kind);
DatasetKind dataset_from_token(const std::string& token);
ModelKind model_from_token(const std::string& token);
bool is_bayesian(ModelKind kind);

/// One cell of the experimental grid. For Diabetes, rho/snr/p are
/// placeholders (0, 0, 10) and seed selects the train/test split.
struct ExperimentSpec {
  DatasetKind dataset = DatasetKind::Independent;
  ModelKind model = ModelKind::Ols;
  double rho = 0.0;
  double snr = 0.0;
  int p = 0;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentSpec&) const = default;
};

/// Flat per-experiment record, one CSV row. Fields that do not apply
/// (for example coverage for classical models, or coefficient metrics
/// on real data) stay disengaged and serialize as empty cells.
struct ResultRow {
  ExperimentSpec spec;
  std::optional<double> test_mse;
  std::optional<double> test_rmse;
  std::optional<double> coef_l2;
  std::optional<double> coef_mse;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> coverage;
  std::optional<double> interval_width;
  std::optional<double> chosen_lambda;
  std::optional<double> chosen_alpha;
  std::optional<long> divergences;
  std::optional<double> fit_time_s;
  std::string error;

  bool operator==(const ResultRow&) const = default;
};

/// Exact column order of the results CSV.
inline constexpr const char* kCsvHeader =
    "dataset,model,rho,snr,p,seed,test_mse,test_rmse,coef_l2,coef_mse,precision,recall,f1,"
    "coverage,interval_width,chosen_lambda,chosen_alpha,divergences,fit_time_s,error";

/// Shortest decimal string that round-trips the exact double.
std::string format_double(double value);

void persist(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> load_rows(const std::string& path);

/// Row equality with fit_time_s ignored (timings are the one
/// non-deterministic column).
bool rows_equal_ignoring_time(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b);

}  // namespace sparsebench
