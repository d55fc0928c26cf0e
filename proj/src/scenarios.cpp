#include "mbfuse/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mbfuse/error.hpp"
#include "mbfuse/rng.hpp"

namespace mbfuse {

ScenarioKind parse_scenario_kind(std::string_view tag) {
  if (tag == "add_modality") return ScenarioKind::AddModality;
  if (tag == "merge") return ScenarioKind::Merge;
  if (tag == "retire") return ScenarioKind::Retire;
  throw Error(ErrorKind::InvalidSpec, "unknown scenario '" + std::string(tag) + "'");
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::AddModality: return "add_modality";
    case ScenarioKind::Merge: return "merge";
    case ScenarioKind::Retire: return "retire";
  }
  return "?";
}

namespace {

void check_level(double level) {
  if (!(level >= 0.0 && level <= 1.0)) {
    throw Error(ErrorKind::LevelOutOfRange, "level " + std::to_string(level) + " outside [0, 1]");
  }
}

void check_multimodal(const ScoreTable& table, ScenarioKind kind) {
  if (table.modality_count() < 2) {
    throw Error(ErrorKind::InvalidSpec,
                std::string(to_string(kind)) + " scenario requires at least two modalities");
  }
}

std::size_t rounded_count(double level, std::size_t scope) {
  return static_cast<std::size_t>(std::llround(level * static_cast<double>(scope)));
}

// Blanks `target` in `count` rows drawn uniformly from `candidates`; a row is
// a candidate when the target is present and some other score survives.
MaskPlan plan_column(const ScoreTable& table, std::span<const std::size_t> rows, std::size_t target,
                     std::size_t count, double level, std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t r : rows) {
    const auto& row = table.row(r);
    if (row.scores[target] && row.present_count() >= 2) candidates.push_back(r);
  }
  if (count > candidates.size()) {
    throw Error(ErrorKind::InfeasibleLevel, "level " + std::to_string(level) + " needs " + std::to_string(count) +
                                                " blanked cells but only " + std::to_string(candidates.size()) +
                                                " rows can lose '" + table.modalities().name(target) + "'");
  }
  Rng rng(seed);
  MaskPlan plan;
  for (std::uint64_t pick : sample_without_replacement(rng, candidates.size(), count)) {
    plan.cells.push_back(Cell{candidates[pick], target});
  }
  std::sort(plan.cells.begin(), plan.cells.end());
  return plan;
}

}  // namespace

MaskPlan plan_add_modality(const ScoreTable& table, const std::string& target_modality, double level,
                           std::uint64_t seed) {
  check_level(level);
  check_multimodal(table, ScenarioKind::AddModality);
  const std::size_t target = table.modalities().require(target_modality);
  std::vector<std::size_t> all(table.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  MaskPlan plan = plan_column(table, all, target, rounded_count(level, table.size()), level, seed);
  plan.level = level;
  plan.scenario = Scenario{ScenarioKind::AddModality, target_modality};
  plan.seed = seed;
  plan.scope = MaskScope::TrainAndTest;
  plan.table_rows = table.size();
  plan.modality_count = table.modality_count();
  return plan;
}

MaskPlan plan_merge(const ScoreTable& table, double level, std::uint64_t seed) {
  check_level(level);
  check_multimodal(table, ScenarioKind::Merge);
  const std::size_t n = table.modality_count();
  const std::size_t rows = table.size();
  if (level * static_cast<double>(n) > static_cast<double>(n - 1)) {
    throw Error(ErrorKind::InfeasibleLevel, "level " + std::to_string(level) + " exceeds (N-1)/N = " +
                                                std::to_string(static_cast<double>(n - 1) / static_cast<double>(n)) +
                                                "; rows could not keep one score each");
  }

  std::vector<std::size_t> present;  // flat cell ids, row * n + modality
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t m = 0; m < n; ++m) {
      if (table.row(r).scores[m]) present.push_back(r * n + m);
    }
  }
  const std::size_t count = rounded_count(level, rows * n);
  if (count + rows > present.size()) {
    throw Error(ErrorKind::InfeasibleLevel, "level " + std::to_string(level) + " would blank " +
                                                std::to_string(count) + " of " + std::to_string(present.size()) +
                                                " present cells across " + std::to_string(rows) + " rows");
  }

  Rng rng(seed);
  std::vector<char> blanked(rows * n, 0);
  std::vector<std::size_t> remaining(rows);
  for (std::size_t r = 0; r < rows; ++r) remaining[r] = table.row(r).present_count();
  for (std::uint64_t pick : sample_without_replacement(rng, present.size(), count)) {
    const std::size_t cell = present[pick];
    blanked[cell] = 1;
    --remaining[cell / n];
  }

  // Cells that may absorb a compensating blank. Repairs only raise empty rows
  // to one score, so this list can only shrink; stale entries are dropped on
  // draw.
  std::vector<std::size_t> donors;
  for (std::size_t cell : present) {
    if (!blanked[cell] && remaining[cell / n] >= 2) donors.push_back(cell);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (remaining[r] != 0) continue;
    std::vector<std::size_t> own;
    for (std::size_t m = 0; m < n; ++m) {
      if (blanked[r * n + m]) own.push_back(r * n + m);
    }
    blanked[own[rng.below(own.size())]] = 0;
    remaining[r] = 1;
    while (true) {
      // Feasibility above guarantees a donor exists.
      const std::size_t idx = rng.below(donors.size());
      const std::size_t cell = donors[idx];
      donors[idx] = donors.back();
      donors.pop_back();
      if (blanked[cell] || remaining[cell / n] < 2) continue;
      blanked[cell] = 1;
      --remaining[cell / n];
      break;
    }
  }

  MaskPlan plan;
  plan.cells.reserve(count);
  for (std::size_t cell = 0; cell < blanked.size(); ++cell) {
    if (blanked[cell]) plan.cells.push_back(Cell{cell / n, cell % n});
  }
  plan.level = level;
  plan.scenario = Scenario{ScenarioKind::Merge, std::nullopt};
  plan.seed = seed;
  plan.scope = MaskScope::TrainAndTest;
  plan.table_rows = rows;
  plan.modality_count = n;
  return plan;
}

MaskPlan plan_retire(const ScoreTable& table, const DataSplit& split, const std::string& target_modality,
                     double level, std::uint64_t seed) {
  check_level(level);
  check_multimodal(table, ScenarioKind::Retire);
  const std::size_t target = table.modalities().require(target_modality);
  const std::vector<std::size_t> test = split.test_rows(table);

  MaskPlan plan = plan_column(table, test, target, rounded_count(level, test.size()), level, seed);
  plan.level = level;
  plan.scenario = Scenario{ScenarioKind::Retire, target_modality};
  plan.seed = seed;
  plan.scope = MaskScope::TestOnly;
  plan.table_rows = table.size();
  plan.modality_count = table.modality_count();
  return plan;
}

ScoreTable apply(const ScoreTable& table, const MaskPlan& plan) {
  if (plan.table_rows != table.size() || plan.modality_count != table.modality_count()) {
    throw Error(ErrorKind::ShapeMismatch, "plan built for " + std::to_string(plan.table_rows) + "x" +
                                              std::to_string(plan.modality_count) + ", table is " +
                                              std::to_string(table.size()) + "x" +
                                              std::to_string(table.modality_count()));
  }
  ScoreTable out = table;
  for (const Cell& c : plan.cells) {
    if (c.row >= out.size() || c.modality >= out.modality_count()) {
      throw Error(ErrorKind::ShapeMismatch, "cell (" + std::to_string(c.row) + ", " + std::to_string(c.modality) +
                                                ") outside the table");
    }
    out.clear_score(c.row, c.modality);
  }
  if (auto empty = out.first_empty_row()) {
    const auto& r = out.row(*empty);
    throw Error(ErrorKind::AllScoresMissing, "plan empties row (" + r.probe_id + ", " + r.gallery_id + ")");
  }
  return out;
}

void write_plan_csv(const MaskPlan& plan, const ModalitySet& modalities, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path.string() + "'");
  out << "row_index,modality\n";
  for (const Cell& c : plan.cells) out << c.row << ',' << modalities.name(c.modality) << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for '" + path.string() + "'");
}

}  // namespace mbfuse
