#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "mbfuse/score_model.hpp"

namespace mbfuse {

/// Min-max parameters fitted on the present training scores of each modality.
struct NormParams {
  ModalitySet modalities;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<std::size_t> fitted_on;

  bool operator==(const NormParams&) const = default;
};

/// Throws DegenerateModality when a modality has fewer than two present
/// training scores or all of them are equal.
NormParams fit_normalization(const ScoreTable& table, std::span<const std::size_t> train_rows);

/// s -> (s - min) / (max - min), clamped to [0, 1]. Missing cells stay missing.
ScoreTable transform(const ScoreTable& table, const NormParams& params);

nlohmann::json to_json(const NormParams& params);
NormParams norm_params_from_json(const nlohmann::json& j);

}  // namespace mbfuse
