#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace mbfuse {

using Score = std::optional<double>;

enum class Label { Genuine, Impostor };

/// Ordered, duplicate-free list of modality names. The order is the column
/// order used by every table, model and file downstream.
class ModalitySet {
 public:
  ModalitySet() = default;
  explicit ModalitySet(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  std::optional<std::size_t> index_of(const std::string& name) const;
  /// Throws UnknownModality when `name` is not a member.
  std::size_t require(const std::string& name) const;

  bool operator==(const ModalitySet&) const = default;

 private:
  std::vector<std::string> names_;
};

struct ComparisonRow {
  std::string probe_id;
  std::string gallery_id;
  Label label = Label::Impostor;
  std::vector<Score> scores;

  std::size_t present_count() const;
  bool complete() const { return present_count() == scores.size(); }

  bool operator==(const ComparisonRow&) const = default;
};

/// Unvalidated input record for build_table.
struct RawRow {
  std::string probe_id;
  std::string gallery_id;
  std::vector<Score> scores;
};

/// Probe x gallery comparisons with one optional score per modality.
///
/// Instances are only produced through build_table or by copying and
/// editing an existing table, so the structural invariants (unique pairs,
/// labels derived from id equality, finite scores) always hold. The
/// "at least one present score" invariant is enforced at construction and
/// re-checked by the operations that blank cells.
class ScoreTable {
 public:
  ScoreTable() = default;

  const ModalitySet& modalities() const noexcept { return modalities_; }
  std::size_t modality_count() const noexcept { return modalities_.size(); }
  const std::vector<ComparisonRow>& rows() const noexcept { return rows_; }
  const ComparisonRow& row(std::size_t index) const { return rows_.at(index); }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  bool normalized() const noexcept { return normalized_; }

  std::size_t genuine_count() const noexcept { return genuine_count_; }
  std::size_t impostor_count() const noexcept { return rows_.size() - genuine_count_; }
  std::size_t missing_count() const;
  std::size_t present_count(std::size_t modality) const;

  const Score& score(std::size_t row, std::size_t modality) const {
    return rows_.at(row).scores.at(modality);
  }

  // Editing a copy. set_score rejects non-finite values; clear_score may
  // leave a row empty, callers that blank cells check the invariant with
  // first_empty_row().
  void set_score(std::size_t row, std::size_t modality, double value);
  void clear_score(std::size_t row, std::size_t modality);
  void set_normalized(bool flag) noexcept { normalized_ = flag; }
  std::optional<std::size_t> first_empty_row() const;

  /// Rows at `indices`, in the given order.
  ScoreTable subset(std::span<const std::size_t> indices) const;
  /// Same rows with only the listed modality columns, in the given order.
  ScoreTable select_modalities(std::span<const std::size_t> columns) const;

  /// Distinct probe ids in first-appearance order.
  std::vector<std::string> probe_ids() const;

  bool operator==(const ScoreTable&) const = default;

 private:
  friend ScoreTable build_table(ModalitySet, std::vector<RawRow>);

  ModalitySet modalities_;
  std::vector<ComparisonRow> rows_;
  bool normalized_ = false;
  std::size_t genuine_count_ = 0;
};

/// Validates and labels raw rows (genuine iff probe_id == gallery_id).
/// Throws DuplicatePair, AllScoresMissing, NonFiniteScore.
ScoreTable build_table(ModalitySet modalities, std::vector<RawRow> rows);

struct DataSplit {
  std::set<std::string> train_probe_ids;
  std::set<std::string> test_probe_ids;

  std::vector<std::size_t> train_rows(const ScoreTable& table) const;
  std::vector<std::size_t> test_rows(const ScoreTable& table) const;
};

/// Partitions probe identities. The whole gallery stays on both sides; only
/// probes are split, so no identity contributes rows to both partitions.
DataSplit split_by_probe(const ScoreTable& table, double fraction, std::uint64_t seed);

}  // namespace mbfuse
