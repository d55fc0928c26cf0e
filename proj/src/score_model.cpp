#include "mbfuse/score_model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "mbfuse/error.hpp"
#include "mbfuse/rng.hpp"

namespace mbfuse {

ModalitySet::ModalitySet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw Error(ErrorKind::InvalidSpec, "modality set must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error(ErrorKind::InvalidSpec, "empty modality name");
    if (!seen.insert(n).second) throw Error(ErrorKind::InvalidSpec, "duplicate modality '" + n + "'");
  }
}

std::optional<std::size_t> ModalitySet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ModalitySet::require(const std::string& name) const {
  auto idx = index_of(name);
  if (!idx) throw Error(ErrorKind::UnknownModality, "'" + name + "'");
  return *idx;
}

std::size_t ComparisonRow::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(), [](const Score& s) { return s.has_value(); }));
}

namespace {

std::string row_tag(const std::string& probe, const std::string& gallery) {
  return "(" + probe + ", " + gallery + ")";
}

}  // namespace

ScoreTable build_table(ModalitySet modalities, std::vector<RawRow> rows) {
  ScoreTable table;
  const std::size_t n = modalities.size();
  table.modalities_ = std::move(modalities);
  table.rows_.reserve(rows.size());

  std::unordered_set<std::string> pairs;
  pairs.reserve(rows.size() * 2);
  for (auto& raw : rows) {
    const std::string tag = row_tag(raw.probe_id, raw.gallery_id);
    if (raw.scores.size() != n) {
      throw Error(ErrorKind::ShapeMismatch, "row " + tag + " has " + std::to_string(raw.scores.size()) +
                                                " scores, expected " + std::to_string(n));
    }
    std::string key = raw.probe_id;
    key.push_back('\0');
    key += raw.gallery_id;
    if (!pairs.insert(std::move(key)).second) throw Error(ErrorKind::DuplicatePair, tag);

    bool any = false;
    for (std::size_t m = 0; m < n; ++m) {
      if (!raw.scores[m]) continue;
      any = true;
      if (!std::isfinite(*raw.scores[m])) {
        throw Error(ErrorKind::NonFiniteScore, tag + " modality '" + table.modalities_.name(m) + "'");
      }
    }
    if (!any) throw Error(ErrorKind::AllScoresMissing, tag);

    ComparisonRow row;
    row.label = raw.probe_id == raw.gallery_id ? Label::Genuine : Label::Impostor;
    row.probe_id = std::move(raw.probe_id);
    row.gallery_id = std::move(raw.gallery_id);
    row.scores = std::move(raw.scores);
    if (row.label == Label::Genuine) ++table.genuine_count_;
    table.rows_.push_back(std::move(row));
  }
  return table;
}

std::size_t ScoreTable::missing_count() const {
  std::size_t missing = 0;
  for (const auto& r : rows_) missing += r.scores.size() - r.present_count();
  return missing;
}

std::size_t ScoreTable::present_count(std::size_t modality) const {
  std::size_t count = 0;
  for (const auto& r : rows_) count += r.scores.at(modality).has_value() ? 1 : 0;
  return count;
}

void ScoreTable::set_score(std::size_t row, std::size_t modality, double value) {
  if (!std::isfinite(value)) {
    const auto& r = rows_.at(row);
    throw Error(ErrorKind::NonFiniteScore, row_tag(r.probe_id, r.gallery_id));
  }
  rows_.at(row).scores.at(modality) = value;
}

void ScoreTable::clear_score(std::size_t row, std::size_t modality) {
  rows_.at(row).scores.at(modality).reset();
}

std::optional<std::size_t> ScoreTable::first_empty_row() const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].present_count() == 0) return i;
  }
  return std::nullopt;
}

ScoreTable ScoreTable::subset(std::span<const std::size_t> indices) const {
  ScoreTable out;
  out.modalities_ = modalities_;
  out.normalized_ = normalized_;
  out.rows_.reserve(indices.size());
  for (std::size_t i : indices) {
    out.rows_.push_back(rows_.at(i));
    if (out.rows_.back().label == Label::Genuine) ++out.genuine_count_;
  }
  return out;
}

ScoreTable ScoreTable::select_modalities(std::span<const std::size_t> columns) const {
  std::vector<std::string> names;
  for (std::size_t c : columns) names.push_back(modalities_.name(c));
  ScoreTable out;
  out.modalities_ = ModalitySet(std::move(names));
  out.normalized_ = normalized_;
  out.genuine_count_ = genuine_count_;
  out.rows_.reserve(rows_.size());
  for (const auto& r : rows_) {
    ComparisonRow nr{r.probe_id, r.gallery_id, r.label, {}};
    nr.scores.reserve(columns.size());
    for (std::size_t c : columns) nr.scores.push_back(r.scores.at(c));
    out.rows_.push_back(std::move(nr));
  }
  return out;
}

std::vector<std::string> ScoreTable::probe_ids() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const auto& r : rows_) {
    if (seen.insert(r.probe_id).second) ids.push_back(r.probe_id);
  }
  return ids;
}

std::vector<std::size_t> DataSplit::train_rows(const ScoreTable& table) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (train_probe_ids.contains(table.row(i).probe_id)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> DataSplit::test_rows(const ScoreTable& table) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (test_probe_ids.contains(table.row(i).probe_id)) out.push_back(i);
  }
  return out;
}

DataSplit split_by_probe(const ScoreTable& table, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::InvalidSpec, "split fraction must lie in (0, 1)");
  }
  std::vector<std::string> ids = table.probe_ids();
  if (ids.size() < 2) {
    throw Error(ErrorKind::TooFewIdentities, std::to_string(ids.size()) + " distinct probe id(s)");
  }
  // Sorting first makes the split independent of row order.
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);

  const auto n = static_cast<long long>(ids.size());
  const long long n_train = std::clamp(std::llround(fraction * static_cast<double>(n)), 1LL, n - 1);
  DataSplit split;
  for (long long i = 0; i < n; ++i) {
    (i < n_train ? split.train_probe_ids : split.test_probe_ids).insert(ids[static_cast<std::size_t>(i)]);
  }
  return split;
}

}  // namespace mbfuse
