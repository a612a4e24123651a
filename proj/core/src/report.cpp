#include "sparsebench/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace sparsebench {

namespace {

// Sortable + printable key component for one axis of one row.
struct AxisValue {
  double order = 0.0;
  std::string label;
  bool operator<(const AxisValue& other) const { return order < other.order; }
  bool operator==(const AxisValue& other) const { return order == other.order; }
};

AxisValue axis_value(const ResultRow& row, const std::string& axis) {
  const auto& spec = row.spec;
  if (axis == "dataset")
    return {static_cast<double>(spec.dataset), to_token(spec.dataset)};
  if (axis == "model") return {static_cast<double>(spec.model), to_token(spec.model)};
  if (axis == "rho") return {spec.rho, format_double(spec.rho)};
  if (axis == "snr") return {spec.snr, format_double(spec.snr)};
  if (axis == "p") return {static_cast<double>(spec.p), std::to_string(spec.p)};
  if (axis == "seed") return {static_cast<double>(spec.seed), std::to_string(spec.seed)};
  throw std::invalid_argument("aggregate: unknown axis '" + axis + "'");
}

std::optional<double> metric_value(const ResultRow& row, const std::string& name) {
  if (name == "test_mse") return row.test_mse;
  if (name == "test_rmse") return row.test_rmse;
  if (name == "coef_l2") return row.coef_l2;
  if (name == "coef_mse") return row.coef_mse;
  if (name == "precision") return row.precision;
  if (name == "recall") return row.recall;
  if (name == "f1") return row.f1;
  if (name == "coverage") return row.coverage;
  if (name == "interval_width") return row.interval_width;
  if (name == "chosen_lambda") return row.chosen_lambda;
  if (name == "chosen_alpha") return row.chosen_alpha;
  if (name == "divergences")
    return row.divergences ? std::optional<double>(static_cast<double>(*row.divergences))
                           : std::nullopt;
  if (name == "fit_time_s") return row.fit_time_s;
  throw std::invalid_argument("aggregate: unknown metric '" + name + "'");
}

}  // namespace

AggregateTable aggregate(const std::vector<ResultRow>& rows,
                         const std::vector<std::string>& group_axes,
                         const std::vector<std::string>& metric_names) {
  if (group_axes.empty()) throw std::invalid_argument("aggregate: no group axes");
  if (metric_names.empty()) throw std::invalid_argument("aggregate: no metrics");

  struct Accumulator {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;  // per metric
  };
  std::map<std::vector<AxisValue>, Accumulator> groups;

  for (const auto& row : rows) {
    std::vector<AxisValue> key;
    key.reserve(group_axes.size());
    for (const auto& axis : group_axes) key.push_back(axis_value(row, axis));
    auto& acc = groups[key];
    if (acc.labels.empty()) {
      for (const auto& k : key) acc.labels.push_back(k.label);
      acc.values.resize(metric_names.size());
    }
    for (std::size_t m = 0; m < metric_names.size(); ++m)
      if (const auto v = metric_value(row, metric_names[m])) acc.values[m].push_back(*v);
  }

  AggregateTable table;
  table.axes = group_axes;
  table.metrics = metric_names;
  for (auto& [key, acc] : groups) {
    AggregateCell cell;
    cell.keys = std::move(acc.labels);
    for (const auto& values : acc.values) {
      if (values.empty()) {
        cell.mean.push_back(std::nullopt);
        cell.stddev.push_back(std::nullopt);
        cell.count.push_back(0);
        continue;
      }
      double sum = 0.0;
      for (double v : values) sum += v;
      const double mean = sum / static_cast<double>(values.size());
      double sq = 0.0;
      for (double v : values) sq += (v - mean) * (v - mean);
      const double stddev =
          values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1)) : 0.0;
      cell.mean.push_back(mean);
      cell.stddev.push_back(stddev);
      cell.count.push_back(static_cast<long>(values.size()));
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

void write_aggregate_csv(const AggregateTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_aggregate_csv: cannot open '" + path + "'");
  for (std::size_t a = 0; a < table.axes.size(); ++a) out << (a ? "," : "") << table.axes[a];
  for (const auto& metric : table.metrics)
    out << ',' << metric << "_mean," << metric << "_std," << metric << "_n";
  out << '\n';
  for (const auto& cell : table.cells) {
    for (std::size_t a = 0; a < cell.keys.size(); ++a) out << (a ? "," : "") << cell.keys[a];
    for (std::size_t m = 0; m < table.metrics.size(); ++m) {
      out << ',' << (cell.mean[m] ? format_double(*cell.mean[m]) : "") << ','
          << (cell.stddev[m] ? format_double(*cell.stddev[m]) : "") << ',' << cell.count[m];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_aggregate_csv: write to '" + path + "' failed");
}

void write_reports(const std::vector<ResultRow>& rows, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::vector<ResultRow> synthetic;
  for (const auto& row : rows)
    if (row.spec.dataset != DatasetKind::Diabetes) synthetic.push_back(row);

  std::vector<ResultRow> calibrated;
  for (const auto& row : synthetic)
    if (row.coverage) calibrated.push_back(row);

  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  write_aggregate_csv(aggregate(synthetic, {"model"}, {"test_mse", "coef_l2", "f1"}),
                      path("summary_by_model.csv"));
  write_aggregate_csv(aggregate(calibrated, {"model"}, {"coverage", "interval_width"}),
                      path("calibration.csv"));
  write_aggregate_csv(aggregate(synthetic, {"model", "rho"}, {"test_mse"}),
                      path("mse_by_rho.csv"));
  write_aggregate_csv(aggregate(synthetic, {"model", "snr"}, {"f1"}), path("f1_by_snr.csv"));
  write_aggregate_csv(aggregate(synthetic, {"model", "p"}, {"fit_time_s"}), path("time_by_p.csv"));
}

}  // namespace sparsebench
