#include "mbfuse/ingest_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mbfuse/error.hpp"

namespace mbfuse {

namespace fs = std::filesystem;

FileFormat parse_file_format(std::string_view tag) {
  if (tag == "long_csv") return FileFormat::LongCsv;
  if (tag == "wide_csv") return FileFormat::WideCsv;
  if (tag == "bssr1_matrix_set") return FileFormat::Bssr1MatrixSet;
  throw Error(ErrorKind::InvalidSpec, "unknown file format '" + std::string(tag) + "'");
}

std::string_view to_string(FileFormat format) {
  switch (format) {
    case FileFormat::LongCsv: return "long_csv";
    case FileFormat::WideCsv: return "wide_csv";
    case FileFormat::Bssr1MatrixSet: return "bssr1_matrix_set";
  }
  return "?";
}

std::string format_score(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_score(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path.string() + "'");
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for '" + path.string() + "'");
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string where(const fs::path& path, std::size_t lineno) {
  return path.string() + ":" + std::to_string(lineno);
}

// Assembles (probe, gallery) rows from per-cell records while preserving
// first-appearance order.
class RowAssembler {
 public:
  explicit RowAssembler(std::size_t n) : n_(n) {}

  std::size_t row_for(std::string_view probe, std::string_view gallery) {
    std::string key(probe);
    key.push_back('\0');
    key.append(gallery);
    auto [it, inserted] = index_.try_emplace(std::move(key), rows_.size());
    if (inserted) rows_.push_back(RawRow{std::string(probe), std::string(gallery), std::vector<Score>(n_)});
    return it->second;
  }

  RawRow& operator[](std::size_t i) { return rows_[i]; }
  void widen(std::size_t n) {
    n_ = n;
    for (auto& r : rows_) r.scores.resize(n);
  }
  std::vector<RawRow> take() { return std::move(rows_); }

 private:
  std::size_t n_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<RawRow> rows_;
};

}  // namespace

ScoreTable read_long_csv(const fs::path& path, const std::vector<std::string>& modalities) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!read_line(in, line) || line != "probe_id,gallery_id,modality,score") {
    throw Error(ErrorKind::MalformedLine, where(path, 1) + " expected header 'probe_id,gallery_id,modality,score'");
  }

  const bool fixed = !modalities.empty();
  std::vector<std::string> names = modalities;
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < names.size(); ++i) column.emplace(names[i], i);

  RowAssembler rows(names.size());
  std::size_t lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != 4 || f[0].empty() || f[1].empty() || f[2].empty()) {
      throw Error(ErrorKind::MalformedLine, where(path, lineno));
    }
    auto value = parse_score(f[3]);
    if (!value) throw Error(ErrorKind::MalformedLine, where(path, lineno) + " score '" + std::string(f[3]) + "'");

    std::string mod(f[2]);
    auto it = column.find(mod);
    if (it == column.end()) {
      if (fixed) throw Error(ErrorKind::UnknownModality, where(path, lineno) + " '" + mod + "'");
      it = column.emplace(mod, names.size()).first;
      names.push_back(mod);
      rows.widen(names.size());
    }
    std::size_t r = rows.row_for(f[0], f[1]);
    Score& cell = rows[r].scores[it->second];
    if (cell) {
      throw Error(ErrorKind::DuplicateCell, where(path, lineno) + " (" + std::string(f[0]) + ", " +
                                                std::string(f[1]) + ", " + mod + ")");
    }
    if (!std::isfinite(*value)) throw Error(ErrorKind::NonFiniteScore, where(path, lineno));
    cell = *value;
  }
  if (names.empty()) {
    // A header-only file carries no modality information.
    return ScoreTable{};
  }
  return build_table(ModalitySet(std::move(names)), rows.take());
}

ScoreTable read_wide_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!read_line(in, line)) throw Error(ErrorKind::MalformedLine, where(path, 1) + " missing header");
  auto header = split_fields(line);
  if (header.size() < 2 || header[0] != "probe_id" || header[1] != "gallery_id") {
    throw Error(ErrorKind::MalformedLine, where(path, 1) + " expected header 'probe_id,gallery_id,<modalities...>'");
  }
  if (header.size() == 2) {
    // Header without modality columns: only an empty table can be stored.
    std::size_t lineno = 1;
    while (read_line(in, line)) {
      ++lineno;
      if (!line.empty()) throw Error(ErrorKind::RaggedRow, where(path, lineno) + " data row in a table without modalities");
    }
    return ScoreTable{};
  }
  std::vector<std::string> names(header.begin() + 2, header.end());
  const std::size_t n = names.size();
  ModalitySet modalities(std::move(names));

  std::vector<RawRow> rows;
  std::size_t lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != n + 2) {
      throw Error(ErrorKind::RaggedRow, where(path, lineno) + " has " + std::to_string(f.size()) + " fields, expected " +
                                            std::to_string(n + 2));
    }
    if (f[0].empty() || f[1].empty()) throw Error(ErrorKind::MalformedLine, where(path, lineno) + " empty identity");
    RawRow row{std::string(f[0]), std::string(f[1]), std::vector<Score>(n)};
    for (std::size_t m = 0; m < n; ++m) {
      if (f[m + 2].empty()) continue;
      auto value = parse_score(f[m + 2]);
      if (!value) {
        throw Error(ErrorKind::NonNumericScore, where(path, lineno) + " field '" + std::string(f[m + 2]) + "'");
      }
      row.scores[m] = *value;
    }
    rows.push_back(std::move(row));
  }
  return build_table(std::move(modalities), std::move(rows));
}

ScoreTable read_bssr1_matrix_set(const std::vector<fs::path>& paths, const std::vector<std::string>& modalities,
                                 std::size_t gallery_size) {
  if (paths.empty()) throw Error(ErrorKind::InvalidSpec, "matrix set needs at least one file");
  if (modalities.size() != paths.size()) {
    throw Error(ErrorKind::InvalidSpec, std::to_string(paths.size()) + " matrix files but " +
                                            std::to_string(modalities.size()) + " modality names");
  }
  if (gallery_size == 0) throw Error(ErrorKind::InvalidSpec, "gallery size must be positive");
  const std::size_t m_size = gallery_size;
  const std::size_t n = paths.size();

  std::vector<RawRow> rows(m_size * m_size);
  for (std::size_t i = 0; i < m_size; ++i) {
    for (std::size_t j = 0; j < m_size; ++j) {
      rows[i * m_size + j] = RawRow{std::to_string(i), std::to_string(j), std::vector<Score>(n)};
    }
  }

  for (std::size_t mod = 0; mod < n; ++mod) {
    const fs::path& path = paths[mod];
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    std::size_t matrix_row = 0;
    std::vector<std::string> tokens;
    while (read_line(in, line)) {
      ++lineno;
      std::istringstream stream(line);
      tokens.clear();
      for (std::string tok; stream >> tok;) tokens.push_back(std::move(tok));
      if (tokens.empty()) continue;
      if (matrix_row >= m_size) {
        throw Error(ErrorKind::ShapeMismatch, where(path, lineno) + " more than " + std::to_string(m_size) + " rows");
      }
      if (tokens.size() != m_size) {
        throw Error(ErrorKind::ShapeMismatch, where(path, lineno) + " row " + std::to_string(matrix_row) + " has " +
                                                  std::to_string(tokens.size()) + " columns, expected " +
                                                  std::to_string(m_size));
      }
      for (std::size_t col = 0; col < m_size; ++col) {
        auto value = parse_score(tokens[col]);
        if (!value) throw Error(ErrorKind::NonNumericScore, where(path, lineno) + " token '" + tokens[col] + "'");
        rows[matrix_row * m_size + col].scores[mod] = *value;
      }
      ++matrix_row;
    }
    if (matrix_row != m_size) {
      throw Error(ErrorKind::ShapeMismatch, path.string() + " has " + std::to_string(matrix_row) + " rows, expected " +
                                                std::to_string(m_size));
    }
  }
  return build_table(ModalitySet(modalities), std::move(rows));
}

ScoreTable read_csv_auto(const fs::path& path, const std::vector<std::string>& modalities) {
  std::string header;
  {
    std::ifstream in = open_input(path);
    read_line(in, header);
  }
  if (header == "probe_id,gallery_id,modality,score") return read_long_csv(path, modalities);
  return read_wide_csv(path);
}

Inventory inventory_of(const ScoreTable& table) {
  Inventory inv;
  if (table.modality_count() == 0) return inv;
  for (const auto& r : table.rows()) {
    if (!r.scores[0]) continue;
    ++inv.rows_per_modality;
    (r.label == Label::Genuine ? inv.genuine_per_modality : inv.impostor_per_modality) += 1;
  }
  inv.total_scores = table.size() * table.modality_count() - table.missing_count();
  return inv;
}

void validate_inventory(const ScoreTable& table, const Inventory& expected) {
  auto fail = [](const std::string& what, std::size_t got, std::size_t want) {
    throw Error(ErrorKind::InventoryMismatch,
                what + " is " + std::to_string(got) + ", expected " + std::to_string(want));
  };
  for (std::size_t m = 0; m < table.modality_count(); ++m) {
    std::size_t total = 0, genuine = 0, impostor = 0;
    for (const auto& r : table.rows()) {
      if (!r.scores[m]) continue;
      ++total;
      (r.label == Label::Genuine ? genuine : impostor) += 1;
    }
    const std::string& name = table.modalities().name(m);
    if (total != expected.rows_per_modality) fail("score count of '" + name + "'", total, expected.rows_per_modality);
    if (genuine != expected.genuine_per_modality) {
      fail("genuine count of '" + name + "'", genuine, expected.genuine_per_modality);
    }
    if (impostor != expected.impostor_per_modality) {
      fail("impostor count of '" + name + "'", impostor, expected.impostor_per_modality);
    }
  }
  const std::size_t total = table.size() * table.modality_count() - table.missing_count();
  if (total != expected.total_scores) fail("total score count", total, expected.total_scores);
}

std::vector<fs::path> matrix_set_paths(const fs::path& dir, const ModalitySet& modalities) {
  std::vector<fs::path> out;
  for (const auto& name : modalities.names()) out.push_back(dir / (name + ".txt"));
  return out;
}

namespace {

void write_long(const ScoreTable& table, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "probe_id,gallery_id,modality,score\n";
  for (const auto& r : table.rows()) {
    for (std::size_t m = 0; m < r.scores.size(); ++m) {
      if (!r.scores[m]) continue;
      out << r.probe_id << ',' << r.gallery_id << ',' << table.modalities().name(m) << ','
          << format_score(*r.scores[m]) << '\n';
    }
  }
  finish_output(out, path);
}

void write_wide(const ScoreTable& table, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "probe_id,gallery_id";
  for (const auto& name : table.modalities().names()) out << ',' << name;
  out << '\n';
  for (const auto& r : table.rows()) {
    out << r.probe_id << ',' << r.gallery_id;
    for (const auto& s : r.scores) {
      out << ',';
      if (s) out << format_score(*s);
    }
    out << '\n';
  }
  finish_output(out, path);
}

void write_matrix_set(const ScoreTable& table, const fs::path& dir) {
  const std::size_t rows = table.size();
  auto m_size = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(rows))));
  if (m_size * m_size != rows) {
    throw Error(ErrorKind::ShapeMismatch, std::to_string(rows) + " rows do not form a square matrix set");
  }
  for (std::size_t i = 0; i < m_size; ++i) {
    for (std::size_t j = 0; j < m_size; ++j) {
      const auto& r = table.row(i * m_size + j);
      if (r.probe_id != std::to_string(i) || r.gallery_id != std::to_string(j) || !r.complete()) {
        throw Error(ErrorKind::ShapeMismatch, "row " + std::to_string(i * m_size + j) +
                                                  " is not a complete index-named matrix cell");
      }
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create '" + dir.string() + "': " + ec.message());
  auto paths = matrix_set_paths(dir, table.modalities());
  for (std::size_t m = 0; m < paths.size(); ++m) {
    std::ofstream out = open_output(paths[m]);
    for (std::size_t i = 0; i < m_size; ++i) {
      for (std::size_t j = 0; j < m_size; ++j) {
        if (j) out << ' ';
        out << format_score(*table.row(i * m_size + j).scores[m]);
      }
      out << '\n';
    }
    finish_output(out, paths[m]);
  }
}

}  // namespace

void write_table(const ScoreTable& table, FileFormat format, const fs::path& path) {
  switch (format) {
    case FileFormat::LongCsv: return write_long(table, path);
    case FileFormat::WideCsv:
      if (table.modality_count() == 0) {
        std::ofstream out = open_output(path);
        out << "probe_id,gallery_id\n";
        return finish_output(out, path);
      }
      return write_wide(table, path);
    case FileFormat::Bssr1MatrixSet: return write_matrix_set(table, path);
  }
}

}  // namespace mbfuse
