#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbfuse/score_model.hpp"

namespace mbfuse {

enum class FileFormat { LongCsv, WideCsv, Bssr1MatrixSet };

FileFormat parse_file_format(std::string_view tag);
std::string_view to_string(FileFormat format);

/// Expected score inventory of a matrix-set dataset.
struct Inventory {
  std::size_t rows_per_modality = 0;
  std::size_t genuine_per_modality = 0;
  std::size_t impostor_per_modality = 0;
  std::size_t total_scores = 0;
};

/// Set 1 of the NIST BSSR1 multimodal release: 517 x 517 comparisons,
/// four comparators.
inline constexpr Inventory kBssr1Set1Inventory{267'289, 517, 266'772, 1'069'156};

/// Counts of a table as an Inventory (present scores only).
Inventory inventory_of(const ScoreTable& table);
/// Throws InventoryMismatch naming the first differing count.
void validate_inventory(const ScoreTable& table, const Inventory& expected);

/// `probe_id,gallery_id,modality,score`, one present score per line. Rows are
/// assembled in first-appearance order of (probe, gallery). When
/// `modalities` is empty the column order is the first-appearance order of
/// modality names; otherwise lines naming other modalities are rejected.
ScoreTable read_long_csv(const std::filesystem::path& path, const std::vector<std::string>& modalities = {});

/// `probe_id,gallery_id,<mod1>,...,<modN>`; an empty field is a missing score.
ScoreTable read_wide_csv(const std::filesystem::path& path);

/// One whitespace-separated square matrix per modality: row i is probe i,
/// column j is gallery j. Identities are named by their zero-based index.
ScoreTable read_bssr1_matrix_set(const std::vector<std::filesystem::path>& paths,
                                 const std::vector<std::string>& modalities, std::size_t gallery_size);

/// Reads a CSV file, choosing long or wide layout from its header.
ScoreTable read_csv_auto(const std::filesystem::path& path, const std::vector<std::string>& modalities = {});

/// Writes `table`. For Bssr1MatrixSet `path` is a directory receiving one
/// `<modality>.txt` per column; the table must be complete, square and use
/// index identity names.
void write_table(const ScoreTable& table, FileFormat format, const std::filesystem::path& path);

/// Paths written by write_table for a matrix set rooted at `dir`.
std::vector<std::filesystem::path> matrix_set_paths(const std::filesystem::path& dir,
                                                    const ModalitySet& modalities);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_score(double value);
/// Parses a full field as a double; nullopt on any trailing garbage.
std::optional<double> parse_score(std::string_view text);

/// Splits on `sep` without quoting rules; identity tokens never contain commas.
std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

}  // namespace mbfuse
