#include "sparsebench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sparsebench/bayes.hpp"
#include "sparsebench/datagen.hpp"
#include "sparsebench/metrics.hpp"
#include "sparsebench/solvers.hpp"

namespace sparsebench {

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!item.empty()) {
        items.push_back(item);
        item.clear();
      }
    } else {
      item.push_back(c);
    }
  }
  if (!item.empty()) items.push_back(item);
  return items;
}

double parse_double_or_throw(const std::string& text, const std::string& key) {
  double value;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("config: bad number '" + text + "' for key '" + key + "'");
  return value;
}

long parse_long_or_throw(const std::string& text, const std::string& key) {
  long value;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("config: bad integer '" + text + "' for key '" + key + "'");
  return value;
}

bool parse_bool_or_throw(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("config: bad boolean '" + text + "' for key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string canonical_cell_encoding(const ExperimentSpec& spec, std::uint64_t base_seed) {
  std::string enc = "dataset=" + to_token(spec.dataset);
  enc += ";rho=" + format_double(spec.rho);
  enc += ";snr=" + format_double(spec.snr);
  enc += ";p=" + std::to_string(spec.p);
  enc += ";seed=" + std::to_string(spec.seed);
  enc += ";base=" + std::to_string(base_seed);
  return enc;
}

std::string sanitize_error(std::string message) {
  for (char& c : message)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return message;
}

Dataset make_dataset(const ExperimentSpec& spec, const RunConfig& config) {
  const std::uint64_t data_seed = derive_seed(spec, config.base_seed);
  if (spec.dataset == DatasetKind::Diabetes) {
    if (config.diabetes_path.empty())
      throw std::runtime_error("diabetes_path is not configured");
    return load_diabetes(config.diabetes_path, data_seed);
  }
  CovarianceSpec cov;
  cov.p = spec.p;
  cov.rho = spec.dataset == DatasetKind::Independent ? 0.0 : spec.rho;
  cov.design = spec.dataset == DatasetKind::Independent ? Design::Independent
               : spec.dataset == DatasetKind::Block     ? Design::Block
                                                        : Design::Toeplitz;
  return generate_dataset(cov, spec.snr, data_seed);
}

FitResult dispatch_fit(const ExperimentSpec& spec, const RunConfig& config, const Dataset& ds) {
  switch (spec.model) {
    case ModelKind::Ols:
      return fit_ols(ds.x_train, ds.y_train);
    case ModelKind::Ridge:
      return fit_ridge_loocv(ds.x_train, ds.y_train);
    case ModelKind::Lasso:
    case ModelKind::ElasticNet: {
      CvPlan plan;
      plan.fold_seed = fnv1a64(canonical_cell_encoding(spec, config.base_seed) +
                               ";model=" + to_token(spec.model) + ";folds");
      return spec.model == ModelKind::Lasso ? fit_lasso_cv(ds.x_train, ds.y_train, plan)
                                            : fit_elastic_net_cv(ds.x_train, ds.y_train, plan);
    }
    case ModelKind::Horseshoe:
    case ModelKind::SpikeSlab: {
      SamplerConfig sampler = config.sampler;
      sampler.seed = fnv1a64(canonical_cell_encoding(spec, config.base_seed) +
                             ";model=" + to_token(spec.model) + ";sampler");
      const auto model =
          spec.model == ModelKind::Horseshoe ? BayesModel::Horseshoe : BayesModel::SpikeSlab;
      return fit_bayes(model, ds, sampler);
    }
  }
  throw std::logic_error("dispatch_fit: unknown model");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "datasets") {
      config.datasets.clear();
      for (const auto& tok : split_list(value)) config.datasets.push_back(dataset_from_token(tok));
    } else if (key == "models") {
      config.models.clear();
      for (const auto& tok : split_list(value)) config.models.push_back(model_from_token(tok));
    } else if (key == "rhos") {
      config.rhos.clear();
      for (const auto& tok : split_list(value)) config.rhos.push_back(parse_double_or_throw(tok, key));
    } else if (key == "snrs") {
      config.snrs.clear();
      for (const auto& tok : split_list(value)) config.snrs.push_back(parse_double_or_throw(tok, key));
    } else if (key == "ps") {
      config.ps.clear();
      for (const auto& tok : split_list(value))
        config.ps.push_back(static_cast<int>(parse_long_or_throw(tok, key)));
    } else if (key == "seeds") {
      config.seeds.clear();
      for (const auto& tok : split_list(value))
        config.seeds.push_back(static_cast<std::uint64_t>(parse_long_or_throw(tok, key)));
    } else if (key == "base_seed") {
      config.base_seed = static_cast<std::uint64_t>(parse_long_or_throw(value, key));
    } else if (key == "include_bayes_p100") {
      config.include_bayes_p100 = parse_bool_or_throw(value, key);
    } else if (key == "diabetes_path") {
      config.diabetes_path = value;
    } else if (key == "chains") {
      config.sampler.chains = static_cast<int>(parse_long_or_throw(value, key));
    } else if (key == "warmup") {
      config.sampler.warmup = static_cast<int>(parse_long_or_throw(value, key));
    } else if (key == "draws") {
      config.sampler.draws = static_cast<int>(parse_long_or_throw(value, key));
    } else if (key == "target_accept") {
      config.sampler.target_accept = parse_double_or_throw(value, key);
    } else if (key == "max_tree_depth") {
      config.sampler.max_tree_depth = static_cast<int>(parse_long_or_throw(value, key));
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
    }
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::vector<ExperimentSpec> expand_grid(const RunConfig& config) {
  if (config.datasets.empty() || config.models.empty() || config.seeds.empty())
    throw std::invalid_argument("expand_grid: empty axis");

  auto datasets = config.datasets;
  auto models = config.models;
  auto rhos = config.rhos;
  auto snrs = config.snrs;
  auto ps = config.ps;
  auto seeds = config.seeds;
  std::sort(datasets.begin(), datasets.end());
  datasets.erase(std::unique(datasets.begin(), datasets.end()), datasets.end());
  std::sort(models.begin(), models.end());
  models.erase(std::unique(models.begin(), models.end()), models.end());
  std::sort(rhos.begin(), rhos.end());
  std::sort(snrs.begin(), snrs.end());
  std::sort(ps.begin(), ps.end());
  std::sort(seeds.begin(), seeds.end());

  const bool has_synthetic = std::any_of(datasets.begin(), datasets.end(),
                                         [](DatasetKind d) { return d != DatasetKind::Diabetes; });
  if (has_synthetic && (rhos.empty() || snrs.empty() || ps.empty()))
    throw std::invalid_argument("expand_grid: empty axis");

  std::vector<ExperimentSpec> specs;
  for (DatasetKind dataset : datasets) {
    for (ModelKind model : models) {
      if (dataset == DatasetKind::Diabetes) {
        for (std::uint64_t seed : seeds)
          specs.push_back({dataset, model, 0.0, 0.0, 10, seed});
        continue;
      }
      const std::vector<double> rho_axis =
          dataset == DatasetKind::Independent ? std::vector<double>{0.0} : rhos;
      for (double rho : rho_axis)
        for (double snr : snrs)
          for (int p : ps) {
            if (is_bayesian(model) && p >= 100 && !config.include_bayes_p100) continue;
            for (std::uint64_t seed : seeds) specs.push_back({dataset, model, rho, snr, p, seed});
          }
    }
  }
  return specs;
}

std::uint64_t derive_seed(const ExperimentSpec& spec, std::uint64_t base_seed) {
  return fnv1a64(canonical_cell_encoding(spec, base_seed));
}

std::vector<ExperimentSpec> apply_subset(const std::vector<ExperimentSpec>& specs,
                                         const std::string& filters) {
  if (trim(filters).empty()) return specs;

  // key -> allowed canonical values (repeated keys OR together)
  std::vector<std::pair<std::string, std::vector<std::string>>> constraints;
  for (const auto& clause : split_list(filters)) {
    const auto eq = clause.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("subset: expected key=value, got '" + clause + "'");
    const std::string key = clause.substr(0, eq);
    const std::string value = clause.substr(eq + 1);
    if (key != "dataset" && key != "model" && key != "rho" && key != "snr" && key != "p" &&
        key != "seed")
      throw std::invalid_argument("subset: unknown key '" + key + "'");
    auto it = std::find_if(constraints.begin(), constraints.end(),
                           [&](const auto& c) { return c.first == key; });
    if (it == constraints.end())
      constraints.push_back({key, {value}});
    else
      it->second.push_back(value);
  }

  const auto spec_value = [](const ExperimentSpec& spec, const std::string& key) -> std::string {
    if (key == "dataset") return to_token(spec.dataset);
    if (key == "model") return to_token(spec.model);
    if (key == "rho") return format_double(spec.rho);
    if (key == "snr") return format_double(spec.snr);
    if (key == "p") return std::to_string(spec.p);
    return std::to_string(spec.seed);
  };
  const auto value_matches = [](const std::string& key, const std::string& wanted,
                                const std::string& actual) {
    if (key == "rho" || key == "snr") {
      // numeric comparison tolerates "0.3" vs the shortest round-trip form
      double w, a;
      auto r1 = std::from_chars(wanted.data(), wanted.data() + wanted.size(), w);
      auto r2 = std::from_chars(actual.data(), actual.data() + actual.size(), a);
      if (r1.ec == std::errc() && r2.ec == std::errc()) return w == a;
    }
    return wanted == actual;
  };

  std::vector<ExperimentSpec> kept;
  for (const auto& spec : specs) {
    bool ok = true;
    for (const auto& [key, values] : constraints) {
      const std::string actual = spec_value(spec, key);
      const bool any = std::any_of(values.begin(), values.end(), [&](const std::string& v) {
        return value_matches(key, v, actual);
      });
      if (!any) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(spec);
  }
  return kept;
}

ResultRow run_experiment(const ExperimentSpec& spec, const RunConfig& config) {
  ResultRow row;
  row.spec = spec;
  try {
    const Dataset ds = make_dataset(spec, config);
    const FitResult fit = dispatch_fit(spec, config, ds);
    row.fit_time_s = fit.fit_time;

    const Eigen::VectorXd y_pred = ds.x_test * fit.beta_hat;
    const auto pm = prediction_metrics(ds.y_test, y_pred);
    row.test_mse = pm.mse;
    row.test_rmse = pm.rmse;

    if (ds.truth) {
      const auto cm = coefficient_metrics(fit.beta_hat, ds.truth->beta_star);
      row.coef_l2 = cm.l2_error;
      row.coef_mse = cm.coef_mse;
      const auto sm = selection_metrics(fit.beta_hat, ds.truth->support);
      row.precision = sm.precision;
      row.recall = sm.recall;
      row.f1 = sm.f1;
      if (fit.posterior) {
        const auto cal = calibration_metrics(*fit.posterior, ds.truth->beta_star);
        row.coverage = cal.coverage;
        row.interval_width = cal.avg_width;
      }
    }

    if (fit.chosen_penalty) {
      row.chosen_lambda = fit.chosen_penalty->lambda;
      if (spec.model == ModelKind::ElasticNet) row.chosen_alpha = fit.chosen_penalty->alpha;
    }
    if (fit.divergences) row.divergences = *fit.divergences;
    if (fit.max_rhat && *fit.max_rhat > 1.05)
      std::cerr << "warning: split-Rhat " << *fit.max_rhat << " > 1.05 for "
                << to_token(spec.model) << " on " << to_token(spec.dataset) << " p=" << spec.p
                << " snr=" << spec.snr << " rho=" << spec.rho << " seed=" << spec.seed << '\n';
  } catch (const std::exception& e) {
    row.error = sanitize_error(e.what());
  }
  return row;
}

std::vector<ResultRow> run_all(const std::vector<ExperimentSpec>& specs, const RunConfig& config,
                               int jobs, const ProgressFn& progress) {
  std::vector<ResultRow> rows(specs.size());
  if (specs.empty()) return rows;
  jobs = std::max(1, jobs);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) break;
      rows[i] = run_experiment(specs[i], config);
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(rows[i], finished, specs.size());
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n_workers = static_cast<int>(std::min<std::size_t>(jobs, specs.size()));
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace sparsebench
