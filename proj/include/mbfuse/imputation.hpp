#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mbfuse/regressors.hpp"
#include "mbfuse/score_model.hpp"

namespace mbfuse {

enum class ImputeMethod { Listwise, Mean, Median, Iterative };
enum class RegressorKind { BayesianRidge, Cart, Knn };

ImputeMethod parse_impute_method(std::string_view tag);
std::string_view to_string(ImputeMethod method);
RegressorKind parse_regressor_kind(std::string_view tag);
std::string_view to_string(RegressorKind kind);

struct ImputerSpec {
  ImputeMethod method = ImputeMethod::Mean;
  RegressorKind regressor = RegressorKind::BayesianRidge;  // iterative only
  int max_iterations = 10;
  double tolerance = 1e-3;
  std::size_t knn_k = 5;
  CartOptions cart;
  BayesianRidgeOptions ridge;

  /// Short stable name, e.g. "mean" or "iterative_knn".
  std::string name() const;
};

/// Throws InvalidSpec for non-positive hyperparameters.
void validate(const ImputerSpec& spec);

struct Convergence {
  int iterations_run = 0;
  double final_max_delta = 0.0;
  bool converged = false;

  bool operator==(const Convergence&) const = default;
};

using Regressor = std::variant<BayesianRidgeModel, CartTree, KnnModel>;

double predict(const Regressor& regressor, std::span<const double> features);

/// Trained state of one imputer. Column statistics come from present
/// training scores only. For iterative imputers, regressors[m] maps the
/// other N-1 columns (ascending index order) to column m.
struct FittedImputer {
  ImputerSpec spec;
  ModalitySet modalities;
  std::vector<double> column_mean;
  std::vector<double> column_median;
  std::vector<Regressor> regressors;
  Convergence convergence;
};

/// Fills every missing cell of `table` with the mean of the column's present
/// scores over `train_rows`. Throws EmptyColumn, NotNormalized.
std::pair<ScoreTable, FittedImputer> impute_mean(const ScoreTable& table, std::span<const std::size_t> train_rows);
/// As impute_mean with the column median (mean of the middle pair for an
/// even count).
std::pair<ScoreTable, FittedImputer> impute_median(const ScoreTable& table, std::span<const std::size_t> train_rows);

/// Rows with every score present, in their original order.
ScoreTable listwise_delete(const ScoreTable& table);

/// Chained-equation fit on the training rows:
///  1. missing training cells start at their column mean;
///  2. each sweep visits modalities in ascending order, fits the regressor
///     on rows where the modality was observed and re-predicts (clamped to
///     [0, 1]) its originally missing cells, using current values of the
///     other columns;
///  3. sweeps stop once the largest change of any imputed cell is below
///     spec.tolerance, or after spec.max_iterations sweeps.
/// The regressors of the final sweep are retained.
FittedImputer fit_iterative(const ScoreTable& table, std::span<const std::size_t> train_rows, const ImputerSpec& spec);

/// Fills missing cells of `table` by running the frozen regressors for the
/// fitted number of sweeps, starting from the training column means. Present
/// cells never change.
ScoreTable apply_iterative(const ScoreTable& table, const FittedImputer& fitted);

/// Fits the imputer described by `spec` (mean, median or iterative).
FittedImputer fit_imputer(const ScoreTable& table, std::span<const std::size_t> train_rows, const ImputerSpec& spec);
/// Applies any fitted imputer to `table`.
ScoreTable apply_imputer(const ScoreTable& table, const FittedImputer& fitted);

nlohmann::json to_json(const ImputerSpec& spec);
/// Unknown keys are rejected.
ImputerSpec imputer_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FittedImputer& fitted);
FittedImputer fitted_imputer_from_json(const nlohmann::json& j);

/// True when every present score lies in [0, 1].
bool in_unit_range(const ScoreTable& table);

}  // namespace mbfuse
