#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mbfuse/score_model.hpp"

namespace mbfuse {

struct FusedRow {
  std::string probe_id;
  std::string gallery_id;
  Label label = Label::Impostor;
  double score = 0.0;

  bool operator==(const FusedRow&) const = default;
};

/// One fused score per surviving row. `provenance` is one of "complete",
/// "available_only", "listwise" or "imputed:<method>".
struct FusedScores {
  std::vector<FusedRow> rows;
  std::string provenance;
};

/// Simple-sum fusion: the arithmetic mean of a row's present scores
/// (skip_missing) or of all N scores. Throws NotNormalized,
/// IncompleteWithSkipDisabled, RowWithNoScores.
FusedScores fuse_simple_sum(const ScoreTable& table, bool skip_missing);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Points ordered by descending threshold, from (0, 0) to (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  double eer = 0.0;
  /// Interpolated operating point where fpr == 1 - tpr.
  double eer_fpr = 0.0;
  double eer_tpr = 0.0;
  std::size_t genuine = 0;
  std::size_t impostor = 0;
};

/// Thresholds are every distinct fused score plus one sentinel above the
/// maximum and one below the minimum; a row is accepted when score >= t.
/// Throws OneClassOnly.
RocCurve roc(const FusedScores& fused);

/// Highest TPR among operating points with FPR <= target.
double tpr_at_fpr(const RocCurve& curve, double target);

/// accuracy[k-1] is the fraction of probes whose genuine mate ranks <= k.
struct CmcCurve {
  std::vector<double> accuracy;
  std::size_t probes = 0;
};

/// Ranks each probe's gallery by descending fused score. Impostors tying
/// the genuine score rank ahead of it. Throws ProbeWithoutMate,
/// ProbeWithMultipleMates.
CmcCurve cmc(const FusedScores& fused, std::size_t max_rank);

void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path);
void write_cmc_csv(const CmcCurve& curve, const std::filesystem::path& path);

/// `probe_id,gallery_id,label,score` with label genuine|impostor.
void write_fused_csv(const FusedScores& fused, const std::filesystem::path& path);
FusedScores read_fused_csv(const std::filesystem::path& path);

}  // namespace mbfuse
