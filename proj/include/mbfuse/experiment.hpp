#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbfuse/imputation.hpp"
#include "mbfuse/ingest_io.hpp"
#include "mbfuse/scenarios.hpp"
#include "mbfuse/synth.hpp"

namespace mbfuse {

inline constexpr const char* kToolVersion = "mbfuse 1.0.0";

struct DatasetSource {
  std::optional<SynthSpec> synth;
  FileFormat format = FileFormat::LongCsv;
  std::vector<std::filesystem::path> paths;
  std::vector<std::string> modalities;  // long_csv column order, or matrix-set names
  std::size_t gallery_size = 0;         // matrix sets only
  bool validate_bssr1 = false;
};

/// One method compared at every grid cell.
struct RosterEntry {
  enum class Kind { NoImputation, Listwise, Impute, Retrain };
  Kind kind = Kind::NoImputation;
  ImputerSpec spec;  // Kind::Impute only

  std::string name() const;
};

struct EvalOptions {
  std::size_t max_rank = 10;
  std::vector<double> fpr_points{1e-3, 1e-2, 1e-1};
};

struct ExperimentConfig {
  DatasetSource dataset;
  Scenario scenario;
  std::vector<double> missing_levels{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int repetitions = 5;
  double split_fraction = 0.8;
  std::uint64_t master_seed = 0;
  std::vector<RosterEntry> roster;
  EvalOptions eval;
  std::filesystem::path output_dir;
};

/// Mean, median, iterative x {bayesian_ridge, cart, knn}, no imputation,
/// listwise deletion, and retraining for the retire scenario.
std::vector<RosterEntry> default_roster(ScenarioKind scenario);

/// Parses the config document. Unknown keys are rejected; relative dataset
/// paths resolve against `base_dir`. Throws InvalidConfig.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentConfig& config);
/// Throws InvalidConfig.
void validate(const ExperimentConfig& config);

ScoreTable load_dataset(const DatasetSource& source);

struct Metrics {
  double auc = 0.0;
  double eer = 0.0;
  std::vector<double> tpr_at_fpr;
  std::vector<double> rank_accuracy;  // k = 1..max_rank

  bool operator==(const Metrics&) const = default;
};

struct RepResult {
  int rep = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t mask_seed = 0;
  std::optional<Metrics> metrics;  // empty when the cell could not be evaluated
  std::string status = "ok";
  std::size_t rows_evaluated = 0;
  std::size_t probes_evaluated = 0;
  std::optional<Convergence> convergence;

  bool operator==(const RepResult&) const = default;
};

struct MethodResult {
  std::string method;
  std::vector<RepResult> reps;
  std::size_t reps_evaluated = 0;
  std::optional<Metrics> mean;
  std::optional<Metrics> sd;  // sample (n - 1) s.d.; zero for a single repetition
};

struct LevelResult {
  double level = 0.0;
  std::vector<MethodResult> methods;
};

struct EvalReport {
  std::string tool_version = kToolVersion;
  std::string config_hash;
  nlohmann::json config;
  MethodResult baseline;  // complete data, no masking
  std::vector<LevelResult> levels;
};

/// Seeds: split = derive_seed(master, kSplitTag, rep); mask =
/// derive_seed(master, kMaskTag, round(level * 1e9), rep). Seeds depend on
/// the level value, not its position, so editing the grid leaves other
/// cells untouched.
std::uint64_t split_seed(std::uint64_t master, int rep);
std::uint64_t mask_seed(std::uint64_t master, double level, int rep);

/// Aggregates the evaluated repetitions of `result` into mean and s.d.
void aggregate(MethodResult& result);

struct RunOptions {
  unsigned jobs = 0;  // 0 = hardware concurrency
  bool write_artifacts = true;
};

/// Runs the full grid. Writes report.json, summary.csv, summary.txt and the
/// per-cell roc_/cmc_ CSVs into config.output_dir when write_artifacts is
/// set. Failures abort with CellFailure naming (level, rep, method).
EvalReport run(const ExperimentConfig& config, const RunOptions& options = {});
/// Runs the grid on an already loaded table.
EvalReport run(const ExperimentConfig& config, const ScoreTable& table, const RunOptions& options = {});

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

struct SummaryOptions {
  std::size_t ranks = 3;
  bool include_baseline = true;
};

/// Per-level `method | metric mean +- s.d.` tables.
std::string summarize_csv(const EvalReport& report, const SummaryOptions& options = {});
std::string summarize_text(const EvalReport& report, const SummaryOptions& options = {});

/// FNV-1a 64-bit hash of `text` as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace mbfuse
