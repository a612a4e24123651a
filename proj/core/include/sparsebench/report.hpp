#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparsebench/results.hpp"

namespace sparsebench {

/// One group of the aggregation: the key values (one per group axis)
/// plus mean/std/count per requested metric. A metric with no values in
/// the group stays disengaged ("missing, not zero").
struct AggregateCell {
  std::vector<std::string> keys;
  std::vector<std::optional<double>> mean;
  std::vector<std::optional<double>> stddev;  // sample std (N-1); 0 for a single value
  std::vector<long> count;
};

struct AggregateTable {
  std::vector<std::string> axes;
  std::vector<std::string> metrics;
  std::vector<AggregateCell> cells;  // deterministic axis order
};

/// Groups rows by the given axes (subset of dataset, model, rho, snr, p,
/// seed) and reduces the named metric columns (any numeric ResultRow
/// column) to mean +- sample standard deviation.
AggregateTable aggregate(const std::vector<ResultRow>& rows,
                         const std::vector<std::string>& group_axes,
                         const std::vector<std::string>& metric_names);

void write_aggregate_csv(const AggregateTable& table, const std::string& path);

/// Emits the five summary tables into out_dir (created if missing):
/// summary_by_model.csv, calibration.csv, mse_by_rho.csv, f1_by_snr.csv,
/// time_by_p.csv. Synthetic rows only; calibration further restricts to
/// rows carrying coverage.
void write_reports(const std::vector<ResultRow>& rows, const std::string& out_dir);

}  // namespace sparsebench
