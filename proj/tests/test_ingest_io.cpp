#include <cstdio>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbfuse/ingest_io.hpp"
#include "mbfuse/rng.hpp"
#include "mbfuse/scenarios.hpp"
#include "mbfuse/synth.hpp"

using namespace mbfuse;
using fixture::thrown;

namespace {

const char* kTableOneLong =
    "probe_id,gallery_id,modality,score\n"
    "s1,s1,fingerprint,0.74\n"
    "s1,s1,iris,1.00\n"
    "s2,s2,face,0.41\n"
    "s2,s2,fingerprint,0.89\n"
    "s2,s2,iris,0.47\n"
    "s3,s3,face,0.27\n"
    "s3,s3,iris,0.03\n"
    "s4,s4,face,0.85\n"
    "s4,s4,fingerprint,0.00\n"
    "s4,s4,iris,0.31\n";

const char* kTableOneWide =
    "probe_id,gallery_id,face,fingerprint,iris\n"
    "s1,s1,,0.74,1.00\n"
    "s2,s2,0.41,0.89,0.47\n"
    "s3,s3,0.27,,0.03\n"
    "s4,s4,0.85,0.00,0.31\n";

const std::vector<std::string> kNames{"face", "fingerprint", "iris"};

// Square matrix text, row-major.
std::string matrix_text(std::size_t m, double (*cell)(std::size_t, std::size_t)) {
  std::string s;
  char buf[64];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      std::snprintf(buf, sizeof buf, "%s%.6f", j ? " " : "", cell(i, j));
      s += buf;
    }
    s += '\n';
  }
  return s;
}

}  // namespace

TEST_CASE("long csv of the demo table") {
  fixture::TempDir dir;
  fixture::write_file(dir / "t.csv", kTableOneLong);
  const ScoreTable t = read_long_csv(dir / "t.csv", kNames);
  CHECK(t == fixture::table_one());
}

TEST_CASE("long csv infers modalities in first-appearance order") {
  fixture::TempDir dir;
  fixture::write_file(dir / "t.csv", kTableOneLong);
  const ScoreTable t = read_long_csv(dir / "t.csv");
  CHECK(t.modalities().names() == std::vector<std::string>{"fingerprint", "iris", "face"});
  CHECK(t.missing_count() == 2);
}

TEST_CASE("long csv edge cases") {
  fixture::TempDir dir;
  fixture::write_file(dir / "h.csv", "probe_id,gallery_id,modality,score\n");
  CHECK(read_long_csv(dir / "h.csv").empty());

  fixture::write_file(dir / "d.csv", "probe_id,gallery_id,modality,score\na,a,x,0.1\na,a,x,0.2\n");
  CHECK(thrown([&] { read_long_csv(dir / "d.csv"); }) == ErrorKind::DuplicateCell);

  fixture::write_file(dir / "u.csv", "probe_id,gallery_id,modality,score\na,a,x,0.1\na,a,zz,0.2\n");
  CHECK(thrown([&] { read_long_csv(dir / "u.csv", {"x"}); }) == ErrorKind::UnknownModality);

  fixture::write_file(dir / "m.csv", "probe_id,gallery_id,modality,score\na,a,x\n");
  try {
    read_long_csv(dir / "m.csv");
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedLine);
    CHECK(std::string(e.what()).find("m.csv:2") != std::string::npos);
  }
  CHECK(thrown([&] { read_long_csv(dir / "missing.csv"); }) == ErrorKind::IoFailure);
}

TEST_CASE("wide csv of the demo table equals the long rendering") {
  fixture::TempDir dir;
  fixture::write_file(dir / "w.csv", kTableOneWide);
  fixture::write_file(dir / "l.csv", kTableOneLong);
  const ScoreTable w = read_wide_csv(dir / "w.csv");
  CHECK(w == read_long_csv(dir / "l.csv", kNames));
  CHECK_FALSE(w.score(0, 0).has_value());
  CHECK(*w.score(0, 1) == 0.74);
  CHECK(read_csv_auto(dir / "l.csv", kNames) == w);
  CHECK(read_csv_auto(dir / "w.csv") == w);
}

TEST_CASE("wide csv errors") {
  fixture::TempDir dir;
  fixture::write_file(dir / "r.csv", "probe_id,gallery_id,a,b\np,g,0.1,0.2,0.3,0.4\n");
  CHECK(thrown([&] { read_wide_csv(dir / "r.csv"); }) == ErrorKind::RaggedRow);
  fixture::write_file(dir / "n.csv", "probe_id,gallery_id,a,b\np,g,0.1,abc\n");
  CHECK(thrown([&] { read_wide_csv(dir / "n.csv"); }) == ErrorKind::NonNumericScore);
  fixture::write_file(dir / "e.csv", "probe_id,gallery_id,a,b\np,g,,\n");
  CHECK(thrown([&] { read_wide_csv(dir / "e.csv"); }) == ErrorKind::AllScoresMissing);
}

TEST_CASE("wide round trip") {
  fixture::TempDir dir;
  const ScoreTable t = fixture::table_one();
  write_table(t, FileFormat::WideCsv, dir / "w.csv");
  CHECK(read_wide_csv(dir / "w.csv") == t);
  write_table(t, FileFormat::LongCsv, dir / "l.csv");
  CHECK(read_long_csv(dir / "l.csv", kNames) == t);

  write_table(ScoreTable{}, FileFormat::WideCsv, dir / "empty.csv");
  CHECK(fixture::read_file(dir / "empty.csv") == "probe_id,gallery_id\n");
  CHECK(read_wide_csv(dir / "empty.csv").empty());
}

TEST_CASE("wide round trip keeps a 90% merge mask and every bit of each score") {
  fixture::TempDir dir;
  const ScoreTable full = generate(fixture::synth_spec(30, 4, 0.3, 17));
  const ScoreTable masked = apply(full, plan_merge(full, 0.7, 5));
  write_table(masked, FileFormat::WideCsv, dir / "m.csv");
  const ScoreTable back = read_wide_csv(dir / "m.csv");
  CHECK(back == masked);
  CHECK(back.missing_count() == static_cast<std::size_t>(std::llround(0.7 * 4 * 900)));

  // level 0.9 exceeds the merge bound for N=4, so use N=20 for the 90% case.
  const ScoreTable wide = generate(fixture::synth_spec(10, 20, 0.3, 18));
  const ScoreTable m90 = apply(wide, plan_merge(wide, 0.9, 6));
  write_table(m90, FileFormat::WideCsv, dir / "m90.csv");
  CHECK(read_wide_csv(dir / "m90.csv") == m90);
}

TEST_CASE("format_score round trips") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.uniform01() * std::pow(10.0, static_cast<double>(rng.below(12)) - 6);
    CHECK(*parse_score(format_score(v)) == v);
  }
  CHECK(format_score(0.1) == "0.1");
  CHECK_FALSE(parse_score("1.0x").has_value());
  CHECK_FALSE(parse_score("").has_value());
  CHECK(*parse_score("+2") == 2.0);
}

TEST_CASE("2x2 matrix set") {
  fixture::TempDir dir;
  fixture::write_file(dir / "a.txt", "1 0\n0 1\n");
  const ScoreTable t = read_bssr1_matrix_set({dir / "a.txt"}, {"a"}, 2);
  CHECK(t.size() == 4);
  CHECK(t.genuine_count() == 2);
  CHECK(t.row(0).probe_id == "0");
  CHECK(*t.score(1, 0) == 0.0);
}

TEST_CASE("matrix set shape errors name file and row") {
  fixture::TempDir dir;
  fixture::write_file(dir / "a.txt", "1 0 0\n0 1\n0 0 1\n");
  try {
    read_bssr1_matrix_set({dir / "a.txt"}, {"a"}, 3);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeMismatch);
    const std::string msg = e.what();
    CHECK(msg.find("a.txt") != std::string::npos);
    CHECK(msg.find("row 1") != std::string::npos);
  }
  fixture::write_file(dir / "b.txt", "1 0\n");
  CHECK(thrown([&] { read_bssr1_matrix_set({dir / "b.txt"}, {"b"}, 2); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("full-size matrix set inventory") {
  fixture::TempDir dir;
  const std::size_t m = 517;
  std::vector<std::filesystem::path> paths;
  const std::vector<std::string> names{"face_c", "face_g", "finger_li", "finger_ri"};
  const std::string text = matrix_text(m, [](std::size_t i, std::size_t j) { return i == j ? 0.9 : 0.1 + 1e-6 * j; });
  for (const auto& n : names) {
    paths.push_back(dir / (n + ".txt"));
    fixture::write_file(paths.back(), text);
  }
  const ScoreTable t = read_bssr1_matrix_set(paths, names, m);
  const Inventory inv = inventory_of(t);
  CHECK(inv.rows_per_modality == 267289);
  CHECK(inv.genuine_per_modality == 517);
  CHECK(inv.impostor_per_modality == 266772);
  CHECK(inv.total_scores == 1069156);
  validate_inventory(t, kBssr1Set1Inventory);

  // Writing the table back reproduces the same table.
  write_table(t, FileFormat::Bssr1MatrixSet, dir / "out");
  CHECK(read_bssr1_matrix_set(matrix_set_paths(dir / "out", t.modalities()), names, m) == t);

  const ScoreTable small = t.subset(std::vector<std::size_t>{0, 1, 2});
  CHECK(thrown([&] { validate_inventory(small, kBssr1Set1Inventory); }) == ErrorKind::InventoryMismatch);
}

TEST_CASE("format tags") {
  CHECK(parse_file_format("long_csv") == FileFormat::LongCsv);
  CHECK(to_string(FileFormat::Bssr1MatrixSet) == "bssr1_matrix_set");
  CHECK(thrown([] { parse_file_format("xml"); }).has_value());
}
