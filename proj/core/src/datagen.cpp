#include "sparsebench/datagen.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sparsebench {

Eigen::MatrixXd build_covariance(const CovarianceSpec& spec) {
  if (spec.p < 1) throw std::invalid_argument("build_covariance: p must be >= 1");
  if (spec.design != Design::Independent && (spec.rho < 0.0 || spec.rho >= 1.0))
    throw std::invalid_argument("build_covariance: rho must lie in [0, 1)");

  const int p = spec.p;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(p, p);
  switch (spec.design) {
    case Design::Independent:
      break;
    case Design::Block:
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          if (i != j && i / spec.block_size == j / spec.block_size)
            cov(i, j) = spec.rho;
      break;
    case Design::Toeplitz:
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          if (i != j) cov(i, j) = std::pow(spec.rho, std::abs(i - j));
      break;
  }
  return cov;
}

Eigen::MatrixXd sample_design(const Eigen::MatrixXd& cov, int n, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sample_design: covariance is not positive definite");
  const Eigen::MatrixXd chol_lower = llt.matrixL();

  const auto p = cov.rows();
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.normal();
    x.row(i) = (chol_lower * z).transpose();
  }
  return x;
}

SparseBeta sample_sparse_beta(int p, Rng& rng) {
  if (p < 5) throw std::invalid_argument("sample_sparse_beta: p must be >= 5");
  const int s = static_cast<int>(std::floor(0.2 * p));

  // Partial Fisher-Yates: the first s slots end up as a uniform draw
  // without replacement.
  std::vector<int> indices(p);
  std::iota(indices.begin(), indices.end(), 0);
  for (int i = 0; i < s; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - i)));
    std::swap(indices[i], indices[j]);
  }
  std::vector<int> support(indices.begin(), indices.begin() + s);
  std::sort(support.begin(), support.end());

  SparseBeta out;
  out.beta_star = Eigen::VectorXd::Zero(p);
  out.support = std::move(support);
  for (int j : out.support) out.beta_star(j) = rng.normal(0.0, 3.0);
  return out;
}

double calibrate_noise(const Eigen::VectorXd& signal, double snr) {
  if (snr <= 0.0) throw std::invalid_argument("calibrate_noise: snr must be positive");
  if (signal.size() == 0) throw std::invalid_argument("calibrate_noise: empty signal");
  const double mean = signal.mean();
  const double var = (signal.array() - mean).square().mean();
  if (!(var > 0.0))
    throw std::invalid_argument("calibrate_noise: signal has zero variance (degenerate coefficients)");
  return std::sqrt(var / snr);
}

int train_size_for(int p) {
  return std::max(50, static_cast<int>(std::floor(1.5 * p)));
}

Dataset generate_dataset(const CovarianceSpec& spec, double snr, std::uint64_t seed) {
  Rng rng(seed);
  const int n_train = train_size_for(spec.p);
  const int n_total = n_train + kTestSize;

  const Eigen::MatrixXd cov = build_covariance(spec);
  const Eigen::MatrixXd x = sample_design(cov, n_total, rng);
  SparseBeta sparse = sample_sparse_beta(spec.p, rng);

  const Eigen::VectorXd signal = x * sparse.beta_star;
  const double sigma = calibrate_noise(signal, snr);

  Eigen::VectorXd y(n_total);
  for (int i = 0; i < n_total; ++i) y(i) = signal(i) + sigma * rng.normal();

  Dataset ds;
  ds.x_train = x.topRows(n_train);
  ds.y_train = y.head(n_train);
  ds.x_test = x.bottomRows(kTestSize);
  ds.y_test = y.tail(kTestSize);
  ds.truth = GroundTruth{std::move(sparse.beta_star), std::move(sparse.support), sigma, snr};
  const char* design_name = spec.design == Design::Independent ? "independent"
                            : spec.design == Design::Block     ? "block"
                                                               : "toeplitz";
  ds.name = design_name;
  return ds;
}

namespace {

constexpr int kDiabetesRows = 442;
constexpr int kDiabetesCols = 11;  // 10 features + target
constexpr int kDiabetesTrain = 354;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',' || c == '\t' || c == ';' || c == ' ') {
      if (!current.empty()) {
        fields.push_back(current);
        current.clear();
      } else if (c == ',' || c == ';') {
        fields.emplace_back();  // preserve explicitly empty cells
      }
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  if (!current.empty()) fields.push_back(current);
  return fields;
}

bool parse_double(const std::string& text, double& value) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset load_diabetes(const std::string& path, std::uint64_t split_seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_diabetes: cannot open '" + path + "'");

  std::vector<std::array<double, kDiabetesCols>> rows;
  std::string line;
  int line_no = 0;
  bool header_checked = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (!header_checked) {
      header_checked = true;
      double probe;
      if (!parse_double(fields[0], probe)) continue;  // header row, skip
    }
    if (static_cast<int>(fields.size()) != kDiabetesCols)
      throw std::runtime_error("load_diabetes: line " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " columns, expected 11 " +
                               "(age,sex,bmi,bp,s1..s6,target)");
    std::array<double, kDiabetesCols> row{};
    for (int c = 0; c < kDiabetesCols; ++c) {
      if (!parse_double(fields[c], row[c]))
        throw std::runtime_error("load_diabetes: non-numeric cell at line " +
                                 std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                 ": '" + fields[c] + "'");
    }
    rows.push_back(row);
  }
  if (static_cast<int>(rows.size()) != kDiabetesRows)
    throw std::runtime_error("load_diabetes: expected 442 data rows, found " +
                             std::to_string(rows.size()));

  std::vector<int> order(kDiabetesRows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split_seed);
  rng.shuffle(order);

  const int n_train = kDiabetesTrain;
  const int n_test = kDiabetesRows - kDiabetesTrain;
  const int p = kDiabetesCols - 1;

  Eigen::MatrixXd x_train(n_train, p), x_test(n_test, p);
  Eigen::VectorXd y_train(n_train), y_test(n_test);
  for (int i = 0; i < n_train; ++i) {
    const auto& row = rows[order[i]];
    for (int j = 0; j < p; ++j) x_train(i, j) = row[j];
    y_train(i) = row[p];
  }
  for (int i = 0; i < n_test; ++i) {
    const auto& row = rows[order[n_train + i]];
    for (int j = 0; j < p; ++j) x_test(i, j) = row[j];
    y_test(i) = row[p];
  }

  // Standardize with training-fold statistics only (population sd).
  for (int j = 0; j < p; ++j) {
    const double mean = x_train.col(j).mean();
    const double sd = std::sqrt((x_train.col(j).array() - mean).square().mean());
    if (!(sd > 0.0))
      throw std::runtime_error("load_diabetes: feature column " + std::to_string(j + 1) +
                               " is constant on the training fold");
    x_train.col(j) = (x_train.col(j).array() - mean) / sd;
    x_test.col(j) = (x_test.col(j).array() - mean) / sd;
  }
  const double y_mean = y_train.mean();
  const double y_sd = std::sqrt((y_train.array() - y_mean).square().mean());
  y_train = (y_train.array() - y_mean) / y_sd;
  y_test = (y_test.array() - y_mean) / y_sd;

  Dataset ds;
  ds.x_train = std::move(x_train);
  ds.y_train = std::move(y_train);
  ds.x_test = std::move(x_test);
  ds.y_test = std::move(y_test);
  ds.name = "diabetes";
  return ds;
}

}  // namespace sparsebench
