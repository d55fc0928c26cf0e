#include "mbfuse/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mbfuse/error.hpp"
#include "mbfuse/experiment.hpp"
#include "mbfuse/fusion_eval.hpp"
#include "mbfuse/normalization.hpp"

namespace mbfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for '" + path.string() + "'");
}

std::vector<std::size_t> all_rows(const ScoreTable& t) {
  std::vector<std::size_t> rows(t.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

const std::vector<std::string> kFormats{"long_csv", "wide_csv", "bssr1_matrix_set"};
const std::vector<std::string> kCsvFormats{"long_csv", "wide_csv"};

struct ConvertArgs {
  std::vector<std::string> in;
  std::string in_format, out, out_format;
  bool validate_bssr1 = false;
  std::vector<std::string> modalities;
  std::size_t gallery_size = 0;
};

struct SynthArgs {
  std::string spec, out, out_format = "wide_csv";
};

struct MaskArgs {
  std::string scenario, target, in, out, plan_out, out_format = "wide_csv";
  double level = 0.0, split_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct NormalizeArgs {
  std::string train, apply, out, params_out, out_format = "wide_csv";
};

struct ImputeArgs {
  std::string method, regressor = "bayesian_ridge", train, apply, out, model_out, model_in, out_format = "wide_csv";
  int max_iterations = 10;
  double tolerance = 1e-3;
  std::size_t k = 5;
};

struct FuseArgs {
  std::string in, out;
  bool skip_missing = false;
};

struct EvalArgs {
  std::string in, roc_out, cmc_out;
  std::size_t max_rank = 10;
};

struct RunArgs {
  std::string config, out_dir;
  unsigned jobs = 0;
};

struct SummarizeArgs {
  std::string report, format;
  std::size_t ranks = 3;
  bool no_baseline = false;
};

ScoreTable load_input(const ConvertArgs& a) {
  const FileFormat format = parse_file_format(a.in_format);
  if (format == FileFormat::Bssr1MatrixSet) {
    if (a.gallery_size == 0) throw Error(ErrorKind::InvalidSpec, "bssr1_matrix_set input needs --gallery-size");
    std::vector<fs::path> paths(a.in.begin(), a.in.end());
    return read_bssr1_matrix_set(paths, a.modalities, a.gallery_size);
  }
  if (a.in.size() != 1) throw Error(ErrorKind::InvalidSpec, "csv input takes exactly one --in");
  return format == FileFormat::LongCsv ? read_long_csv(a.in[0], a.modalities) : read_wide_csv(a.in[0]);
}

void cmd_convert(const ConvertArgs& a) {
  const ScoreTable table = load_input(a);
  if (a.validate_bssr1) validate_inventory(table, kBssr1Set1Inventory);
  write_table(table, parse_file_format(a.out_format), a.out);
}

void cmd_synth(const SynthArgs& a) {
  SynthSpec spec = synth_spec_from_json(read_json(a.spec));
  write_table(generate(spec), parse_file_format(a.out_format), a.out);
}

void cmd_mask(const MaskArgs& a, std::ostream& err) {
  const ScoreTable table = read_csv_auto(a.in);
  const ScenarioKind kind = parse_scenario_kind(a.scenario);
  if (kind != ScenarioKind::Merge && a.target.empty()) {
    throw Error(ErrorKind::InvalidSpec, std::string(to_string(kind)) + " needs --target-modality");
  }
  MaskPlan plan;
  switch (kind) {
    case ScenarioKind::AddModality: plan = plan_add_modality(table, a.target, a.level, a.seed); break;
    case ScenarioKind::Merge: plan = plan_merge(table, a.level, a.seed); break;
    case ScenarioKind::Retire:
      plan = plan_retire(table, split_by_probe(table, a.split_fraction, a.seed), a.target, a.level, a.seed);
      break;
  }
  write_table(apply(table, plan), parse_file_format(a.out_format), a.out);
  if (!a.plan_out.empty()) write_plan_csv(plan, table.modalities(), a.plan_out);
  err << "blanked " << plan.cells.size() << " cells\n";
}

void cmd_normalize(const NormalizeArgs& a) {
  const ScoreTable train = read_csv_auto(a.train);
  const NormParams params = fit_normalization(train, all_rows(train));
  const ScoreTable target = a.apply.empty() ? train : read_csv_auto(a.apply, train.modalities().names());
  write_table(transform(target, params), parse_file_format(a.out_format), a.out);
  if (!a.params_out.empty()) write_json(to_json(params), a.params_out);
}

void cmd_impute(const ImputeArgs& a) {
  FittedImputer fitted;
  if (!a.model_in.empty()) {
    fitted = fitted_imputer_from_json(read_json(a.model_in));
  } else {
    if (a.train.empty()) throw Error(ErrorKind::InvalidSpec, "impute needs --train or --model-in");
    ImputerSpec spec;
    spec.method = parse_impute_method(a.method);
    spec.regressor = parse_regressor_kind(a.regressor);
    spec.max_iterations = a.max_iterations;
    spec.tolerance = a.tolerance;
    spec.knn_k = a.k;
    validate(spec);
    const ScoreTable train = read_csv_auto(a.train);
    fitted = fit_imputer(train, all_rows(train), spec);
  }
  const ScoreTable target = read_csv_auto(a.apply, fitted.modalities.names());
  write_table(apply_imputer(target, fitted), parse_file_format(a.out_format), a.out);
  if (!a.model_out.empty()) write_json(to_json(fitted), a.model_out);
}

void cmd_fuse(const FuseArgs& a) { write_fused_csv(fuse_simple_sum(read_csv_auto(a.in), a.skip_missing), a.out); }

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const FusedScores fused = read_fused_csv(a.in);
  const RocCurve curve = roc(fused);
  const CmcCurve ranks = cmc(fused, a.max_rank);
  write_roc_csv(curve, a.roc_out);
  write_cmc_csv(ranks, a.cmc_out);
  out << "auc," << format_score(curve.auc) << '\n' << "eer," << format_score(curve.eer) << '\n';
  out << "rank1," << format_score(ranks.accuracy.front()) << '\n';
}

void cmd_run(const RunArgs& a, std::ostream& out) {
  const fs::path config_path = a.config;
  ExperimentConfig config = config_from_json(read_json(config_path), config_path.parent_path());
  config.output_dir = a.out_dir;
  RunOptions options;
  options.jobs = a.jobs;
  const EvalReport report = run(config, options);
  out << summarize_text(report);
}

void cmd_summarize(const SummarizeArgs& a, std::ostream& out) {
  const EvalReport report = report_from_json(read_json(a.report));
  SummaryOptions options;
  options.ranks = a.ranks;
  options.include_baseline = !a.no_baseline;
  out << (a.format == "csv" ? summarize_csv(report, options) : summarize_text(report, options));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score-level fusion of multimodal biometric scores with missing data"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "Convert between score file formats");
  c->add_option("--in", convert.in, "Input file(s); one per modality for matrix sets")->required();
  c->add_option("--in-format", convert.in_format)->required()->check(CLI::IsMember(kFormats));
  c->add_option("--out", convert.out, "Output file, or directory for matrix sets")->required();
  c->add_option("--out-format", convert.out_format)->required()->check(CLI::IsMember(kFormats));
  c->add_flag("--validate-bssr1", convert.validate_bssr1, "Check the BSSR1 Set 1 score inventory");
  c->add_option("--modalities", convert.modalities, "Modality names")->delimiter(',');
  c->add_option("--gallery-size", convert.gallery_size, "Matrix side length");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic score table");
  s->add_option("--spec", synth.spec, "SynthSpec JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out", synth.out)->required();
  s->add_option("--out-format", synth.out_format)->check(CLI::IsMember(kFormats));

  MaskArgs mask;
  auto* m = app.add_subcommand("mask", "Blank cells according to a scenario");
  m->add_option("--scenario", mask.scenario)->required()->check(CLI::IsMember({"add_modality", "merge", "retire"}));
  m->add_option("--level", mask.level)->required();
  m->add_option("--seed", mask.seed)->required();
  m->add_option("--target-modality", mask.target);
  m->add_option("--split-fraction", mask.split_fraction, "Train fraction for the retire split");
  m->add_option("--in", mask.in)->required()->check(CLI::ExistingFile);
  m->add_option("--out", mask.out)->required();
  m->add_option("--out-format", mask.out_format)->check(CLI::IsMember(kCsvFormats));
  m->add_option("--plan-out", mask.plan_out, "Write the blanked cells as CSV");

  NormalizeArgs norm;
  auto* n = app.add_subcommand("normalize", "Min-max normalize with parameters fit on a training table");
  n->add_option("--train", norm.train)->required()->check(CLI::ExistingFile);
  n->add_option("--apply", norm.apply, "Table to transform (default: the training table)")->check(CLI::ExistingFile);
  n->add_option("--out", norm.out)->required();
  n->add_option("--out-format", norm.out_format)->check(CLI::IsMember(kCsvFormats));
  n->add_option("--params-out", norm.params_out);

  ImputeArgs imp;
  auto* i = app.add_subcommand("impute", "Fill missing scores");
  i->add_option("--method", imp.method)->check(CLI::IsMember({"mean", "median", "iterative"}));
  i->add_option("--regressor", imp.regressor)->check(CLI::IsMember({"bayesian_ridge", "cart", "knn"}));
  i->add_option("--max-iterations", imp.max_iterations);
  i->add_option("--tolerance", imp.tolerance);
  i->add_option("--k", imp.k, "Neighbours for the knn regressor");
  auto* train_opt = i->add_option("--train", imp.train)->check(CLI::ExistingFile);
  i->add_option("--apply", imp.apply)->required()->check(CLI::ExistingFile);
  i->add_option("--out", imp.out)->required();
  i->add_option("--out-format", imp.out_format)->check(CLI::IsMember(kCsvFormats));
  auto* model_out = i->add_option("--model-out", imp.model_out);
  auto* model_in = i->add_option("--model-in", imp.model_in)->check(CLI::ExistingFile);
  model_out->excludes(model_in);
  model_in->excludes(train_opt);

  FuseArgs fuse;
  auto* f = app.add_subcommand("fuse", "Simple-sum fusion");
  f->add_option("--in", fuse.in)->required()->check(CLI::ExistingFile);
  f->add_option("--out", fuse.out)->required();
  f->add_flag("--skip-missing", fuse.skip_missing, "Average the available scores of incomplete rows");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "ROC and CMC of fused scores");
  e->add_option("--in", ev.in)->required()->check(CLI::ExistingFile);
  e->add_option("--roc-out", ev.roc_out)->required();
  e->add_option("--cmc-out", ev.cmc_out)->required();
  e->add_option("--max-rank", ev.max_rank)->check(CLI::PositiveNumber);

  RunArgs runa;
  auto* r = app.add_subcommand("run", "Run an experiment grid");
  r->add_option("--config", runa.config)->required()->check(CLI::ExistingFile);
  r->add_option("--out-dir", runa.out_dir)->required();
  r->add_option("--jobs", runa.jobs, "Parallel grid cells (default: all cores)");

  SummarizeArgs sum;
  auto* su = app.add_subcommand("summarize", "Render report tables");
  su->add_option("--report", sum.report)->required()->check(CLI::ExistingFile);
  su->add_option("--format", sum.format)->required()->check(CLI::IsMember({"csv", "text"}));
  su->add_option("--ranks", sum.ranks, "Rank-k columns to show");
  su->add_flag("--no-baseline", sum.no_baseline, "Omit the complete-data row");

  try {
    app.parse(argc, argv);
    if (i->parsed() && imp.model_in.empty() && imp.method.empty()) {
      throw CLI::ValidationError("--method", "required unless --model-in is given");
    }
  } catch (const CLI::ParseError& pe) {
    std::ostringstream o, eo;
    const int code = app.exit(pe, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (c->parsed()) cmd_convert(convert);
    if (s->parsed()) cmd_synth(synth);
    if (m->parsed()) cmd_mask(mask, err);
    if (n->parsed()) cmd_normalize(norm);
    if (i->parsed()) cmd_impute(imp);
    if (f->parsed()) cmd_fuse(fuse);
    if (e->parsed()) cmd_eval(ev, out);
    if (r->parsed()) cmd_run(runa, out);
    if (su->parsed()) cmd_summarize(sum, out);
  } catch (const Error& ex) {
    err << "mbfuse: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    err << "mbfuse: " << ex.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace mbfuse
