#include "sparsebench/results.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace sparsebench {

std::string to_token(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Independent: return "independent";
    case DatasetKind::Block: return "block";
    case DatasetKind::Toeplitz: return "toeplitz";
    case DatasetKind::Diabetes: return "diabetes";
  }
  throw std::logic_error("unknown DatasetKind");
}

std::string to_token(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ols: return "ols";
    case ModelKind::Ridge: return "ridge";
    case ModelKind::Lasso: return "lasso";
    case ModelKind::ElasticNet: return "elastic_net";
    case ModelKind::Horseshoe: return "horseshoe";
    case ModelKind::SpikeSlab: return "spike_slab";
  }
  throw std::logic_error("unknown ModelKind");
}

DatasetKind dataset_from_token(const std::string& token) {
  if (token == "independent") return DatasetKind::Independent;
  if (token == "block") return DatasetKind::Block;
  if (token == "toeplitz") return DatasetKind::Toeplitz;
  if (token == "diabetes") return DatasetKind::Diabetes;
  throw std::invalid_argument("unknown dataset '" + token + "'");
}

ModelKind model_from_token(const std::string& token) {
  if (token == "ols") return ModelKind::Ols;
  if (token == "ridge") return ModelKind::Ridge;
  if (token == "lasso") return ModelKind::Lasso;
  if (token == "elastic_net") return ModelKind::ElasticNet;
  if (token == "horseshoe") return ModelKind::Horseshoe;
  if (token == "spike_slab") return ModelKind::SpikeSlab;
  throw std::invalid_argument("unknown model '" + token + "'");
}

bool is_bayesian(ModelKind kind) {
  return kind == ModelKind::Horseshoe || kind == ModelKind::SpikeSlab;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buffer, ptr);
}

namespace {

std::string opt_cell(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

std::string opt_cell(const std::optional<long>& value) {
  return value ? std::to_string(*value) : std::string();
}

double parse_double_cell(const std::string& cell, const char* column, int line) {
  double value;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::runtime_error("results CSV: bad " + std::string(column) + " at line " +
                             std::to_string(line) + ": '" + cell + "'");
  return value;
}

std::optional<double> parse_opt_double(const std::string& cell, const char* column, int line) {
  if (cell.empty()) return std::nullopt;
  return parse_double_cell(cell, column, line);
}

std::optional<long> parse_opt_long(const std::string& cell, const char* column, int line) {
  if (cell.empty()) return std::nullopt;
  long value;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::runtime_error("results CSV: bad " + std::string(column) + " at line " +
                             std::to_string(line) + ": '" + cell + "'");
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace

void persist(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("persist: cannot open '" + path + "' for writing");
  out << kCsvHeader << '\n';
  for (const auto& row : rows) {
    out << to_token(row.spec.dataset) << ',' << to_token(row.spec.model) << ','
        << format_double(row.spec.rho) << ',' << format_double(row.spec.snr) << ',' << row.spec.p
        << ',' << row.spec.seed << ',' << opt_cell(row.test_mse) << ',' << opt_cell(row.test_rmse)
        << ',' << opt_cell(row.coef_l2) << ',' << opt_cell(row.coef_mse) << ','
        << opt_cell(row.precision) << ',' << opt_cell(row.recall) << ',' << opt_cell(row.f1) << ','
        << opt_cell(row.coverage) << ',' << opt_cell(row.interval_width) << ','
        << opt_cell(row.chosen_lambda) << ',' << opt_cell(row.chosen_alpha) << ','
        << opt_cell(row.divergences) << ',' << opt_cell(row.fit_time_s) << ',' << row.error
        << '\n';
  }
  if (!out) throw std::runtime_error("persist: write to '" + path + "' failed");
}

std::vector<ResultRow> load_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_rows: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_rows: '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw std::runtime_error("load_rows: unexpected header in '" + path + "'");

  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 20)
      throw std::runtime_error("load_rows: line " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " cells, expected 20");
    ResultRow row;
    row.spec.dataset = dataset_from_token(cells[0]);
    row.spec.model = model_from_token(cells[1]);
    row.spec.rho = parse_double_cell(cells[2], "rho", line_no);
    row.spec.snr = parse_double_cell(cells[3], "snr", line_no);
    row.spec.p = static_cast<int>(parse_double_cell(cells[4], "p", line_no));
    {
      std::uint64_t seed;
      const auto [ptr, ec] = std::from_chars(cells[5].data(), cells[5].data() + cells[5].size(), seed);
      if (ec != std::errc() || ptr != cells[5].data() + cells[5].size())
        throw std::runtime_error("results CSV: bad seed at line " + std::to_string(line_no));
      row.spec.seed = seed;
    }
    row.test_mse = parse_opt_double(cells[6], "test_mse", line_no);
    row.test_rmse = parse_opt_double(cells[7], "test_rmse", line_no);
    row.coef_l2 = parse_opt_double(cells[8], "coef_l2", line_no);
    row.coef_mse = parse_opt_double(cells[9], "coef_mse", line_no);
    row.precision = parse_opt_double(cells[10], "precision", line_no);
    row.recall = parse_opt_double(cells[11], "recall", line_no);
    row.f1 = parse_opt_double(cells[12], "f1", line_no);
    row.coverage = parse_opt_double(cells[13], "coverage", line_no);
    row.interval_width = parse_opt_double(cells[14], "interval_width", line_no);
    row.chosen_lambda = parse_opt_double(cells[15], "chosen_lambda", line_no);
    row.chosen_alpha = parse_opt_double(cells[16], "chosen_alpha", line_no);
    row.divergences = parse_opt_long(cells[17], "divergences", line_no);
    row.fit_time_s = parse_opt_double(cells[18], "fit_time_s", line_no);
    row.error = cells[19];
    rows.push_back(std::move(row));
  }
  return rows;
}

bool rows_equal_ignoring_time(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ResultRow lhs = a[i];
    ResultRow rhs = b[i];
    lhs.fit_time_s.reset();
    rhs.fit_time_s.reset();
    if (!(lhs == rhs)) return false;
  }
  return true;
}

}  // namespace sparsebench
