#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbfuse/score_model.hpp"

namespace mbfuse {

enum class ScenarioKind { AddModality, Merge, Retire };

ScenarioKind parse_scenario_kind(std::string_view tag);
std::string_view to_string(ScenarioKind kind);

struct Scenario {
  ScenarioKind kind = ScenarioKind::Merge;
  std::optional<std::string> target_modality;  // add_modality and retire only
};

enum class MaskScope { TrainAndTest, TestOnly };

struct Cell {
  std::size_t row = 0;
  std::size_t modality = 0;

  auto operator<=>(const Cell&) const = default;
};

/// The exact set of cells a scenario blanks. `cells` is sorted by
/// (row, modality); `table_rows` and `modality_count` record the shape the
/// plan was built for.
struct MaskPlan {
  double level = 0.0;
  Scenario scenario;
  std::vector<Cell> cells;
  std::uint64_t seed = 0;
  MaskScope scope = MaskScope::TrainAndTest;
  std::size_t table_rows = 0;
  std::size_t modality_count = 0;
};

/// Blanks the target modality in round(level * rows) uniformly chosen rows.
MaskPlan plan_add_modality(const ScoreTable& table, const std::string& target_modality, double level,
                           std::uint64_t seed);

/// Blanks round(level * rows * N) cells drawn uniformly over all present
/// cells, then repairs rows left without any score: each such row gets one
/// random cell back and a random cell from a row holding >= 2 scores is
/// blanked instead, so the count stays exact. Throws InfeasibleLevel when
/// level * N > N - 1.
MaskPlan plan_merge(const ScoreTable& table, double level, std::uint64_t seed);

/// Blanks the target modality in round(level * |test rows|) test rows;
/// training rows are never touched.
MaskPlan plan_retire(const ScoreTable& table, const DataSplit& split, const std::string& target_modality,
                     double level, std::uint64_t seed);

/// Copy of `table` with the plan's cells blanked. Throws ShapeMismatch when
/// the plan was built for another shape and AllScoresMissing if a row would
/// be left empty.
ScoreTable apply(const ScoreTable& table, const MaskPlan& plan);

/// Audit file: header `row_index,modality`, one blanked cell per line.
void write_plan_csv(const MaskPlan& plan, const ModalitySet& modalities, const std::filesystem::path& path);

}  // namespace mbfuse
