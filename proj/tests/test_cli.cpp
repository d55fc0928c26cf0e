#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbfuse/cli.hpp"
#include "mbfuse/experiment.hpp"
#include "mbfuse/fusion_eval.hpp"
#include "mbfuse/imputation.hpp"
#include "mbfuse/ingest_io.hpp"

using namespace mbfuse;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mbfuse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string s(const std::filesystem::path& p) { return p.string(); }

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"fuse", "--out", "x.csv"}).code == 1);
  CHECK(cli({"mask", "--scenario", "sideways", "--level", "0.1", "--seed", "1", "--in", "/etc/hostname", "--out", "x"}).code == 1);
  const Result help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("summarize") != std::string::npos);
}

TEST_CASE("synth, mask, normalize, impute, fuse and eval agree with the library") {
  fixture::TempDir dir;
  fixture::write_file(dir / "spec.json", to_json(fixture::synth_spec(20, 4, 0.6, 3)).dump());
  REQUIRE(cli({"synth", "--spec", s(dir / "spec.json"), "--out", s(dir / "t.csv")}).code == 0);
  const ScoreTable t = read_wide_csv(dir / "t.csv");
  CHECK(t == generate(fixture::synth_spec(20, 4, 0.6, 3)));

  const Result masked = cli({"mask", "--scenario", "merge", "--level", "0.5", "--seed", "9", "--in", s(dir / "t.csv"),
                             "--out", s(dir / "m.csv"), "--plan-out", s(dir / "plan.csv")});
  REQUIRE(masked.code == 0);
  CHECK(masked.out.empty());
  const ScoreTable m = read_wide_csv(dir / "m.csv");
  CHECK(m == apply(t, plan_merge(t, 0.5, 9)));

  REQUIRE(cli({"normalize", "--train", s(dir / "m.csv"), "--out", s(dir / "n.csv")}).code == 0);
  REQUIRE(cli({"impute", "--method", "iterative", "--regressor", "knn", "--train", s(dir / "n.csv"), "--apply",
               s(dir / "n.csv"), "--out", s(dir / "i.csv"), "--model-out", s(dir / "model.json")})
              .code == 0);
  const ScoreTable n = read_wide_csv(dir / "n.csv");
  std::vector<std::size_t> rows(n.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  ImputerSpec spec;
  spec.method = ImputeMethod::Iterative;
  spec.regressor = RegressorKind::Knn;
  const ScoreTable imputed = apply_imputer(n, fit_imputer(n, rows, spec));
  CHECK(read_wide_csv(dir / "i.csv") == imputed);

  // A saved model reproduces the same output.
  REQUIRE(cli({"impute", "--model-in", s(dir / "model.json"), "--apply", s(dir / "n.csv"), "--out",
               s(dir / "i2.csv")})
              .code == 0);
  CHECK(fixture::read_file(dir / "i2.csv") == fixture::read_file(dir / "i.csv"));

  REQUIRE(cli({"fuse", "--in", s(dir / "i.csv"), "--out", s(dir / "f.csv")}).code == 0);
  CHECK(cli({"fuse", "--in", s(dir / "n.csv"), "--out", s(dir / "f2.csv")}).code == 2);
  REQUIRE(cli({"fuse", "--in", s(dir / "n.csv"), "--out", s(dir / "f2.csv"), "--skip-missing"}).code == 0);

  const Result ev = cli({"eval", "--in", s(dir / "f.csv"), "--roc-out", s(dir / "roc.csv"), "--cmc-out",
                         s(dir / "cmc.csv"), "--max-rank", "5"});
  REQUIRE(ev.code == 0);
  const RocCurve curve = roc(read_fused_csv(dir / "f.csv"));
  CHECK(ev.out.find("auc," + format_score(curve.auc)) != std::string::npos);
}

TEST_CASE("infeasible merge level exits 2") {
  fixture::TempDir dir;
  write_table(generate(fixture::synth_spec(6, 4, 0.2, 1)), FileFormat::WideCsv, dir / "t.csv");
  const Result r = cli({"mask", "--scenario", "merge", "--level", "0.8", "--seed", "1", "--in", s(dir / "t.csv"),
                        "--out", s(dir / "m.csv")});
  CHECK(r.code == 2);
  CHECK(r.err.find("InfeasibleLevel") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("convert with a short matrix row exits 2 naming file and row") {
  fixture::TempDir dir;
  std::string text;
  for (int i = 0; i < 517; ++i) {
    const int cols = i == 200 ? 516 : 517;
    for (int j = 0; j < cols; ++j) text += (j ? " " : "") + std::string(i == j ? "0.9" : "0.1");
    text += '\n';
  }
  fixture::write_file(dir / "ri.txt", text);
  const Result r = cli({"convert", "--in", s(dir / "ri.txt"), "--in-format", "bssr1_matrix_set", "--modalities", "ri",
                        "--gallery-size", "517", "--out", s(dir / "o.csv"), "--out-format", "wide_csv",
                        "--validate-bssr1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("ShapeMismatch") != std::string::npos);
  CHECK(r.err.find("ri.txt") != std::string::npos);
  CHECK(r.err.find("row 200") != std::string::npos);
}

TEST_CASE("convert round trip and inventory check") {
  fixture::TempDir dir;
  write_table(fixture::table_one(), FileFormat::WideCsv, dir / "w.csv");
  REQUIRE(cli({"convert", "--in", s(dir / "w.csv"), "--in-format", "wide_csv", "--out", s(dir / "l.csv"),
               "--out-format", "long_csv"})
              .code == 0);
  CHECK(read_long_csv(dir / "l.csv", {"face", "fingerprint", "iris"}) == fixture::table_one());
  const Result inv = cli({"convert", "--in", s(dir / "w.csv"), "--in-format", "wide_csv", "--out", s(dir / "x.csv"),
                          "--out-format", "long_csv", "--validate-bssr1"});
  CHECK(inv.code == 2);
  CHECK(inv.err.find("InventoryMismatch") != std::string::npos);
}

TEST_CASE("run and summarize") {
  fixture::TempDir dir;
  json cfg{{"dataset", {{"synth", to_json(fixture::synth_spec(16, 3, 0.6, 2))}}},
           {"scenario", "retire"},
           {"target_modality", "m0"},
           {"missing_levels", {0.0, 0.5}},
           {"repetitions", 2},
           {"master_seed", 3}};
  fixture::write_file(dir / "exp.json", cfg.dump());
  const Result r = cli({"run", "--config", s(dir / "exp.json"), "--out-dir", s(dir / "out"), "--jobs", "2"});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "out" / "report.json"));
  CHECK(std::filesystem::exists(dir / "out" / "roc_0.5_0_retrain.csv"));

  const Result csv = cli({"summarize", "--report", s(dir / "out" / "report.json"), "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out == fixture::read_file(dir / "out" / "summary.csv"));
  const Result text = cli({"summarize", "--report", s(dir / "out" / "report.json"), "--format", "text"});
  CHECK(text.out == fixture::read_file(dir / "out" / "summary.txt"));

  cfg["unknown"] = true;
  fixture::write_file(dir / "bad.json", cfg.dump());
  const Result bad = cli({"run", "--config", s(dir / "bad.json"), "--out-dir", s(dir / "out2")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("InvalidConfig") != std::string::npos);
}
