#include "mbfuse/imputation.hpp"

#include <algorithm>
#include <cmath>

#include "mbfuse/error.hpp"

namespace mbfuse {

using nlohmann::json;

ImputeMethod parse_impute_method(std::string_view tag) {
  if (tag == "listwise") return ImputeMethod::Listwise;
  if (tag == "mean") return ImputeMethod::Mean;
  if (tag == "median") return ImputeMethod::Median;
  if (tag == "iterative") return ImputeMethod::Iterative;
  throw Error(ErrorKind::InvalidSpec, "unknown imputation method '" + std::string(tag) + "'");
}

std::string_view to_string(ImputeMethod method) {
  switch (method) {
    case ImputeMethod::Listwise: return "listwise";
    case ImputeMethod::Mean: return "mean";
    case ImputeMethod::Median: return "median";
    case ImputeMethod::Iterative: return "iterative";
  }
  return "?";
}

RegressorKind parse_regressor_kind(std::string_view tag) {
  if (tag == "bayesian_ridge") return RegressorKind::BayesianRidge;
  if (tag == "cart") return RegressorKind::Cart;
  if (tag == "knn") return RegressorKind::Knn;
  throw Error(ErrorKind::InvalidSpec, "unknown regressor '" + std::string(tag) + "'");
}

std::string_view to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::BayesianRidge: return "bayesian_ridge";
    case RegressorKind::Cart: return "cart";
    case RegressorKind::Knn: return "knn";
  }
  return "?";
}

std::string ImputerSpec::name() const {
  std::string out(to_string(method));
  if (method == ImputeMethod::Iterative) out += "_" + std::string(to_string(regressor));
  return out;
}

void validate(const ImputerSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); };
  if (spec.max_iterations <= 0) fail("max_iterations must be positive");
  if (!(spec.tolerance > 0.0)) fail("tolerance must be positive");
  if (spec.knn_k == 0) fail("knn k must be positive");
  if (spec.cart.max_depth <= 0) fail("cart max_depth must be positive");
  if (spec.cart.min_leaf == 0) fail("cart min_leaf must be positive");
  if (spec.ridge.max_updates <= 0) fail("ridge max_updates must be positive");
  if (!(spec.ridge.tolerance > 0.0)) fail("ridge tolerance must be positive");
}

double predict(const Regressor& regressor, std::span<const double> features) {
  return std::visit([&](const auto& model) { return model.predict(features); }, regressor);
}

bool in_unit_range(const ScoreTable& table) {
  for (const auto& r : table.rows()) {
    for (const auto& s : r.scores) {
      if (s && !(*s >= 0.0 && *s <= 1.0)) return false;
    }
  }
  return true;
}

namespace {

void require_unit_range(const ScoreTable& table) {
  if (!in_unit_range(table)) {
    throw Error(ErrorKind::NotNormalized, "imputation expects scores normalized to [0, 1]");
  }
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

void fit_column_stats(const ScoreTable& table, std::span<const std::size_t> train_rows, FittedImputer& fitted) {
  const std::size_t n = table.modality_count();
  std::vector<std::vector<double>> columns(n);
  for (std::size_t r : train_rows) {
    const auto& scores = table.row(r).scores;
    for (std::size_t m = 0; m < n; ++m) {
      if (scores[m]) columns[m].push_back(*scores[m]);
    }
  }
  fitted.modalities = table.modalities();
  fitted.column_mean.assign(n, 0.0);
  fitted.column_median.assign(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    if (columns[m].empty()) {
      throw Error(ErrorKind::EmptyColumn, "'" + table.modalities().name(m) + "' has no present training score");
    }
    double sum = 0.0;
    for (double v : columns[m]) sum += v;
    fitted.column_mean[m] = sum / static_cast<double>(columns[m].size());
    fitted.column_median[m] = median_of(std::move(columns[m]));
  }
}

ScoreTable fill_constant(const ScoreTable& table, const std::vector<double>& fill) {
  ScoreTable out = table;
  for (std::size_t r = 0; r < out.size(); ++r) {
    for (std::size_t m = 0; m < out.modality_count(); ++m) {
      if (!out.score(r, m)) out.set_score(r, m, fill[m]);
    }
  }
  return out;
}

void check_shape(const ScoreTable& table, const FittedImputer& fitted) {
  if (table.modalities() != fitted.modalities) {
    throw Error(ErrorKind::ShapeMismatch, "imputer fitted for a different modality set");
  }
}

std::pair<ScoreTable, FittedImputer> impute_univariate(const ScoreTable& table,
                                                       std::span<const std::size_t> train_rows,
                                                       ImputeMethod method) {
  require_unit_range(table);
  FittedImputer fitted;
  fitted.spec.method = method;
  fit_column_stats(table, train_rows, fitted);
  fitted.convergence = Convergence{0, 0.0, true};
  ScoreTable out = fill_constant(table, method == ImputeMethod::Mean ? fitted.column_mean : fitted.column_median);
  return {std::move(out), std::move(fitted)};
}

// Dense working copy of some rows with a mask of originally present cells.
struct Workspace {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<char> present;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool observed(std::size_t r, std::size_t c) const { return present[r * cols + c] != 0; }

  // Other columns of row r in ascending index order, skipping `target`.
  void features(std::size_t r, std::size_t target, std::vector<double>& out) const {
    out.clear();
    for (std::size_t c = 0; c < cols; ++c) {
      if (c != target) out.push_back(at(r, c));
    }
  }
};

Workspace make_workspace(const ScoreTable& table, std::span<const std::size_t> rows, const std::vector<double>& init) {
  Workspace ws;
  ws.rows = rows.size();
  ws.cols = table.modality_count();
  ws.values.resize(ws.rows * ws.cols);
  ws.present.resize(ws.rows * ws.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& scores = table.row(rows[i]).scores;
    for (std::size_t m = 0; m < ws.cols; ++m) {
      ws.present[i * ws.cols + m] = scores[m].has_value();
      ws.values[i * ws.cols + m] = scores[m] ? *scores[m] : init[m];
    }
  }
  return ws;
}

std::size_t minimum_rows(const ImputerSpec& spec) {
  switch (spec.regressor) {
    case RegressorKind::BayesianRidge: return 2;
    case RegressorKind::Cart: return std::max<std::size_t>(2 * spec.cart.min_leaf, 2);
    case RegressorKind::Knn: return std::max<std::size_t>(spec.knn_k, 2);
  }
  return 2;
}

Regressor fit_regressor(const Workspace& ws, std::size_t target, const ImputerSpec& spec, const std::string& name) {
  std::vector<std::size_t> observed;
  for (std::size_t r = 0; r < ws.rows; ++r) {
    if (ws.observed(r, target)) observed.push_back(r);
  }
  const auto n = static_cast<Eigen::Index>(observed.size());
  const auto d = static_cast<Eigen::Index>(ws.cols - 1);
  FeatureMatrix x(n, d);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t r = observed[static_cast<std::size_t>(i)];
    Eigen::Index c_out = 0;
    for (std::size_t c = 0; c < ws.cols; ++c) {
      if (c != target) x(i, c_out++) = ws.at(r, c);
    }
    y[i] = ws.at(r, target);
  }
  try {
    switch (spec.regressor) {
      case RegressorKind::BayesianRidge: return fit_bayesian_ridge(x, y, spec.ridge);
      case RegressorKind::Cart: return fit_cart(x, y, spec.cart);
      case RegressorKind::Knn: return fit_knn(std::move(x), std::move(y), spec.knn_k);
    }
  } catch (const Error& e) {
    throw Error(ErrorKind::RegressorFitFailure, "'" + name + "': " + e.what());
  }
  throw Error(ErrorKind::RegressorFitFailure, "'" + name + "': unknown regressor");
}

// One chained sweep: re-predicts every originally missing cell, modality by
// modality. Returns the largest absolute change.
double sweep(Workspace& ws, const std::vector<Regressor>& regressors, std::size_t target,
             std::vector<double>& buffer) {
  double max_delta = 0.0;
  for (std::size_t r = 0; r < ws.rows; ++r) {
    if (ws.observed(r, target)) continue;
    ws.features(r, target, buffer);
    const double next = std::clamp(predict(regressors[target], buffer), 0.0, 1.0);
    max_delta = std::max(max_delta, std::abs(next - ws.at(r, target)));
    ws.at(r, target) = next;
  }
  return max_delta;
}

}  // namespace

std::pair<ScoreTable, FittedImputer> impute_mean(const ScoreTable& table, std::span<const std::size_t> train_rows) {
  return impute_univariate(table, train_rows, ImputeMethod::Mean);
}

std::pair<ScoreTable, FittedImputer> impute_median(const ScoreTable& table, std::span<const std::size_t> train_rows) {
  return impute_univariate(table, train_rows, ImputeMethod::Median);
}

ScoreTable listwise_delete(const ScoreTable& table) {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table.row(r).complete()) keep.push_back(r);
  }
  return table.subset(keep);
}

FittedImputer fit_iterative(const ScoreTable& table, std::span<const std::size_t> train_rows, const ImputerSpec& spec) {
  validate(spec);
  if (spec.method != ImputeMethod::Iterative) throw Error(ErrorKind::InvalidSpec, "fit_iterative needs method iterative");
  const std::size_t n = table.modality_count();
  if (n < 2) throw Error(ErrorKind::InvalidSpec, "iterative imputation needs at least two modalities");
  require_unit_range(table);

  FittedImputer fitted;
  fitted.spec = spec;
  fit_column_stats(table, train_rows, fitted);

  Workspace ws = make_workspace(table, train_rows, fitted.column_mean);
  const std::size_t needed = minimum_rows(spec);
  for (std::size_t m = 0; m < n; ++m) {
    std::size_t observed = 0;
    for (std::size_t r = 0; r < ws.rows; ++r) observed += ws.observed(r, m) ? 1 : 0;
    if (observed < needed) {
      throw Error(ErrorKind::NotEnoughObservedRows, "'" + table.modalities().name(m) + "' has " +
                                                        std::to_string(observed) + " observed training rows, needs " +
                                                        std::to_string(needed));
    }
  }

  fitted.regressors.resize(n);
  std::vector<double> buffer;
  for (int it = 1; it <= spec.max_iterations; ++it) {
    double max_delta = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      fitted.regressors[m] = fit_regressor(ws, m, spec, table.modalities().name(m));
      max_delta = std::max(max_delta, sweep(ws, fitted.regressors, m, buffer));
    }
    fitted.convergence.iterations_run = it;
    fitted.convergence.final_max_delta = max_delta;
    if (max_delta < spec.tolerance) {
      fitted.convergence.converged = true;
      break;
    }
  }
  return fitted;
}

ScoreTable apply_iterative(const ScoreTable& table, const FittedImputer& fitted) {
  check_shape(table, fitted);
  if (fitted.regressors.size() != table.modality_count()) {
    throw Error(ErrorKind::ShapeMismatch, "imputer holds no regressor per modality");
  }
  require_unit_range(table);
  std::vector<std::size_t> rows(table.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  Workspace ws = make_workspace(table, rows, fitted.column_mean);

  std::vector<double> buffer;
  for (int it = 0; it < fitted.convergence.iterations_run; ++it) {
    for (std::size_t m = 0; m < ws.cols; ++m) sweep(ws, fitted.regressors, m, buffer);
  }

  ScoreTable out = table;
  for (std::size_t r = 0; r < ws.rows; ++r) {
    for (std::size_t m = 0; m < ws.cols; ++m) {
      if (!ws.observed(r, m)) out.set_score(r, m, ws.at(r, m));
    }
  }
  return out;
}

FittedImputer fit_imputer(const ScoreTable& table, std::span<const std::size_t> train_rows, const ImputerSpec& spec) {
  switch (spec.method) {
    case ImputeMethod::Mean:
    case ImputeMethod::Median: {
      validate(spec);
      require_unit_range(table);
      FittedImputer fitted;
      fitted.spec = spec;
      fit_column_stats(table, train_rows, fitted);
      fitted.convergence = Convergence{0, 0.0, true};
      return fitted;
    }
    case ImputeMethod::Iterative: return fit_iterative(table, train_rows, spec);
    case ImputeMethod::Listwise: break;
  }
  throw Error(ErrorKind::InvalidSpec, "listwise deletion has no fitted state");
}

ScoreTable apply_imputer(const ScoreTable& table, const FittedImputer& fitted) {
  switch (fitted.spec.method) {
    case ImputeMethod::Mean:
    case ImputeMethod::Median:
      check_shape(table, fitted);
      require_unit_range(table);
      return fill_constant(table,
                           fitted.spec.method == ImputeMethod::Mean ? fitted.column_mean : fitted.column_median);
    case ImputeMethod::Iterative: return apply_iterative(table, fitted);
    case ImputeMethod::Listwise: return listwise_delete(table);
  }
  return table;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const ImputerSpec& spec) {
  json j{{"method", to_string(spec.method)}};
  if (spec.method == ImputeMethod::Iterative) {
    j["regressor"] = to_string(spec.regressor);
    j["max_iterations"] = spec.max_iterations;
    j["tolerance"] = spec.tolerance;
    j["k"] = spec.knn_k;
    j["max_depth"] = spec.cart.max_depth;
    j["min_leaf"] = spec.cart.min_leaf;
    j["ridge_max_updates"] = spec.ridge.max_updates;
    j["ridge_tolerance"] = spec.ridge.tolerance;
  }
  return j;
}

ImputerSpec imputer_spec_from_json(const json& j) {
  static const char* kKeys[] = {"method",    "regressor", "max_iterations",    "tolerance",      "k",
                                "max_depth", "min_leaf",  "ridge_max_updates", "ridge_tolerance"};
  if (!j.is_object()) throw Error(ErrorKind::InvalidSpec, "imputer spec must be an object");
  for (const auto& item : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), item.key()) == std::end(kKeys)) {
      throw Error(ErrorKind::InvalidSpec, "imputer spec: unknown key '" + item.key() + "'");
    }
  }
  try {
    ImputerSpec spec;
    spec.method = parse_impute_method(j.at("method").get<std::string>());
    if (spec.method == ImputeMethod::Iterative) {
      spec.regressor = parse_regressor_kind(j.at("regressor").get<std::string>());
    } else if (j.size() > 1) {
      throw Error(ErrorKind::InvalidSpec, "hyperparameters only apply to iterative imputers");
    }
    spec.max_iterations = j.value("max_iterations", spec.max_iterations);
    spec.tolerance = j.value("tolerance", spec.tolerance);
    spec.knn_k = j.value("k", spec.knn_k);
    spec.cart.max_depth = j.value("max_depth", spec.cart.max_depth);
    spec.cart.min_leaf = j.value("min_leaf", spec.cart.min_leaf);
    spec.ridge.max_updates = j.value("ridge_max_updates", spec.ridge.max_updates);
    spec.ridge.tolerance = j.value("ridge_tolerance", spec.ridge.tolerance);
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("imputer spec: ") + e.what());
  }
}

json to_json(const FittedImputer& fitted) {
  json regressors = json::array();
  for (const auto& r : fitted.regressors) {
    regressors.push_back(std::visit([](const auto& model) { return to_json(model); }, r));
  }
  return {{"spec", to_json(fitted.spec)},
          {"modalities", fitted.modalities.names()},
          {"column_mean", fitted.column_mean},
          {"column_median", fitted.column_median},
          {"convergence",
           {{"iterations_run", fitted.convergence.iterations_run},
            {"final_max_delta", fitted.convergence.final_max_delta},
            {"converged", fitted.convergence.converged}}},
          {"regressors", regressors}};
}

FittedImputer fitted_imputer_from_json(const json& j) {
  try {
    FittedImputer fitted;
    fitted.spec = imputer_spec_from_json(j.at("spec"));
    fitted.modalities = ModalitySet(j.at("modalities").get<std::vector<std::string>>());
    fitted.column_mean = j.at("column_mean").get<std::vector<double>>();
    fitted.column_median = j.at("column_median").get<std::vector<double>>();
    const json& conv = j.at("convergence");
    fitted.convergence = Convergence{conv.at("iterations_run").get<int>(), conv.at("final_max_delta").get<double>(),
                                     conv.at("converged").get<bool>()};
    const std::size_t n = fitted.modalities.size();
    if (fitted.column_mean.size() != n || fitted.column_median.size() != n) {
      throw Error(ErrorKind::InvalidSpec, "fitted imputer: column statistics do not match modalities");
    }
    for (const auto& r : j.at("regressors")) {
      switch (fitted.spec.regressor) {
        case RegressorKind::BayesianRidge: fitted.regressors.emplace_back(bayesian_ridge_from_json(r)); break;
        case RegressorKind::Cart: fitted.regressors.emplace_back(cart_from_json(r)); break;
        case RegressorKind::Knn: fitted.regressors.emplace_back(knn_from_json(r)); break;
      }
    }
    if (fitted.spec.method == ImputeMethod::Iterative && fitted.regressors.size() != n) {
      throw Error(ErrorKind::InvalidSpec, "fitted imputer: expected one regressor per modality");
    }
    return fitted;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("fitted imputer: ") + e.what());
  }
}

}  // namespace mbfuse
