#include "mbfuse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "mbfuse/error.hpp"
#include "mbfuse/fusion_eval.hpp"
#include "mbfuse/normalization.hpp"
#include "mbfuse/rng.hpp"

namespace mbfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSplitTag = 0x53504c4954ULL;  // "SPLIT"
constexpr std::uint64_t kMaskTag = 0x4d41534bULL;     // "MASK"

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& item : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
      config_error(where + ": unknown key '" + item.key() + "'");
    }
  }
}

}  // namespace

std::string RosterEntry::name() const {
  switch (kind) {
    case Kind::NoImputation: return "no_imputation";
    case Kind::Listwise: return "listwise";
    case Kind::Retrain: return "retrain";
    case Kind::Impute: return spec.name();
  }
  return "?";
}

std::vector<RosterEntry> default_roster(ScenarioKind scenario) {
  std::vector<RosterEntry> roster;
  auto impute = [&](ImputeMethod method, RegressorKind regressor = RegressorKind::BayesianRidge) {
    RosterEntry e;
    e.kind = RosterEntry::Kind::Impute;
    e.spec.method = method;
    e.spec.regressor = regressor;
    roster.push_back(e);
  };
  impute(ImputeMethod::Mean);
  impute(ImputeMethod::Median);
  impute(ImputeMethod::Iterative, RegressorKind::BayesianRidge);
  impute(ImputeMethod::Iterative, RegressorKind::Cart);
  impute(ImputeMethod::Iterative, RegressorKind::Knn);
  roster.push_back(RosterEntry{RosterEntry::Kind::NoImputation, {}});
  roster.push_back(RosterEntry{RosterEntry::Kind::Listwise, {}});
  if (scenario == ScenarioKind::Retire) roster.push_back(RosterEntry{RosterEntry::Kind::Retrain, {}});
  return roster;
}

// ---------------------------------------------------------------------------
// Config

namespace {

RosterEntry roster_entry_from_json(const json& j) {
  if (!j.is_object() || !j.contains("method")) config_error("imputer entry needs a 'method'");
  const std::string method = j.at("method").get<std::string>();
  if (method == "none" || method == "listwise" || method == "retrain") {
    if (j.size() != 1) config_error("'" + method + "' takes no parameters");
    RosterEntry e;
    e.kind = method == "none"       ? RosterEntry::Kind::NoImputation
             : method == "listwise" ? RosterEntry::Kind::Listwise
                                    : RosterEntry::Kind::Retrain;
    return e;
  }
  try {
    return RosterEntry{RosterEntry::Kind::Impute, imputer_spec_from_json(j)};
  } catch (const Error& e) {
    config_error(e.what());
  }
}

json to_json(const RosterEntry& e) {
  switch (e.kind) {
    case RosterEntry::Kind::NoImputation: return {{"method", "none"}};
    case RosterEntry::Kind::Listwise: return {{"method", "listwise"}};
    case RosterEntry::Kind::Retrain: return {{"method", "retrain"}};
    case RosterEntry::Kind::Impute: return to_json(e.spec);
  }
  return {};
}

DatasetSource dataset_from_json(const json& j, const fs::path& base_dir) {
  reject_unknown(j, {"synth", "format", "paths", "modalities", "gallery_size", "validate_bssr1"}, "dataset");
  DatasetSource src;
  if (j.contains("synth")) {
    if (j.size() != 1) config_error("dataset: 'synth' excludes file settings");
    try {
      src.synth = synth_spec_from_json(j.at("synth"));
    } catch (const Error& e) {
      config_error(std::string("dataset.synth: ") + e.what());
    }
    return src;
  }
  try {
    src.format = parse_file_format(j.at("format").get<std::string>());
  } catch (const Error& e) {
    config_error(std::string("dataset.format: ") + e.what());
  }
  for (const auto& p : j.at("paths")) {
    fs::path path = p.get<std::string>();
    src.paths.push_back(path.is_absolute() || base_dir.empty() ? path : base_dir / path);
  }
  src.modalities = j.value("modalities", std::vector<std::string>{});
  src.gallery_size = j.value("gallery_size", std::size_t{0});
  src.validate_bssr1 = j.value("validate_bssr1", false);
  if (src.paths.empty()) config_error("dataset.paths must not be empty");
  if (src.format != FileFormat::Bssr1MatrixSet && src.paths.size() != 1) {
    config_error("csv datasets take exactly one path");
  }
  if (src.format == FileFormat::Bssr1MatrixSet && src.gallery_size == 0) {
    config_error("matrix-set datasets need gallery_size");
  }
  return src;
}

json to_json(const DatasetSource& src) {
  if (src.synth) return {{"synth", to_json(*src.synth)}};
  json paths = json::array();
  for (const auto& p : src.paths) paths.push_back(p.string());
  json j{{"format", to_string(src.format)}, {"paths", paths}, {"validate_bssr1", src.validate_bssr1}};
  if (!src.modalities.empty()) j["modalities"] = src.modalities;
  if (src.gallery_size) j["gallery_size"] = src.gallery_size;
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  try {
    reject_unknown(j, {"dataset", "scenario", "target_modality", "missing_levels", "repetitions", "split_fraction",
                       "master_seed", "imputers", "eval", "output_dir"},
                   "config");
    ExperimentConfig cfg;
    cfg.dataset = dataset_from_json(j.at("dataset"), base_dir);
    try {
      cfg.scenario.kind = parse_scenario_kind(j.at("scenario").get<std::string>());
    } catch (const Error& e) {
      config_error(e.what());
    }
    if (j.contains("target_modality")) cfg.scenario.target_modality = j.at("target_modality").get<std::string>();
    if (j.contains("missing_levels")) cfg.missing_levels = j.at("missing_levels").get<std::vector<double>>();
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    cfg.split_fraction = j.value("split_fraction", cfg.split_fraction);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    if (j.contains("imputers")) {
      for (const auto& e : j.at("imputers")) cfg.roster.push_back(roster_entry_from_json(e));
      if (cfg.roster.empty()) config_error("imputer roster must not be empty");
    } else {
      cfg.roster = default_roster(cfg.scenario.kind);
    }
    if (j.contains("eval")) {
      const json& ev = j.at("eval");
      reject_unknown(ev, {"max_rank", "fpr_points"}, "eval");
      cfg.eval.max_rank = ev.value("max_rank", cfg.eval.max_rank);
      if (ev.contains("fpr_points")) cfg.eval.fpr_points = ev.at("fpr_points").get<std::vector<double>>();
    }
    if (j.contains("output_dir")) {
      fs::path out = j.at("output_dir").get<std::string>();
      cfg.output_dir = out.is_absolute() || base_dir.empty() ? out : base_dir / out;
    }
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    config_error(e.what());
  }
}

json to_json(const ExperimentConfig& cfg) {
  json roster = json::array();
  for (const auto& e : cfg.roster) roster.push_back(to_json(e));
  json j{{"dataset", to_json(cfg.dataset)},
         {"scenario", to_string(cfg.scenario.kind)},
         {"missing_levels", cfg.missing_levels},
         {"repetitions", cfg.repetitions},
         {"split_fraction", cfg.split_fraction},
         {"master_seed", cfg.master_seed},
         {"imputers", roster},
         {"eval", {{"max_rank", cfg.eval.max_rank}, {"fpr_points", cfg.eval.fpr_points}}}};
  if (cfg.scenario.target_modality) j["target_modality"] = *cfg.scenario.target_modality;
  return j;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.missing_levels.empty()) config_error("missing_levels must not be empty");
  for (std::size_t i = 0; i < cfg.missing_levels.size(); ++i) {
    const double level = cfg.missing_levels[i];
    if (!(level >= 0.0 && level <= 1.0)) config_error("missing level " + std::to_string(level) + " outside [0, 1]");
    if (i > 0 && !(level > cfg.missing_levels[i - 1])) config_error("missing_levels must be strictly ascending");
  }
  if (cfg.repetitions < 1) config_error("repetitions must be >= 1");
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0)) config_error("split_fraction must lie in (0, 1)");
  if (cfg.roster.empty()) config_error("imputer roster must not be empty");
  if (cfg.eval.max_rank == 0) config_error("eval.max_rank must be positive");
  for (double f : cfg.eval.fpr_points) {
    if (!(f >= 0.0 && f <= 1.0)) config_error("fpr point outside [0, 1]");
  }
  const bool targeted = cfg.scenario.kind != ScenarioKind::Merge;
  if (targeted && !cfg.scenario.target_modality) {
    config_error(std::string(to_string(cfg.scenario.kind)) + " scenario needs target_modality");
  }
  if (!targeted && cfg.scenario.target_modality) config_error("merge scenario takes no target_modality");
  std::vector<std::string> names;
  for (const auto& e : cfg.roster) {
    if (e.kind == RosterEntry::Kind::Retrain && cfg.scenario.kind != ScenarioKind::Retire) {
      config_error("'retrain' only applies to the retire scenario");
    }
    if (e.kind == RosterEntry::Kind::Impute && e.spec.method == ImputeMethod::Listwise) {
      config_error("use {\"method\": \"listwise\"} without parameters");
    }
    const std::string name = e.name();
    if (std::find(names.begin(), names.end(), name) != names.end()) config_error("duplicate method '" + name + "'");
    names.push_back(name);
  }
}

namespace {

// Checks that need the loaded table.
void validate_against(const ExperimentConfig& cfg, const ScoreTable& table) {
  const std::size_t n = table.modality_count();
  if (n < 2) config_error("scenarios need at least two modalities");
  if (cfg.scenario.target_modality && !table.modalities().index_of(*cfg.scenario.target_modality)) {
    config_error("target_modality '" + *cfg.scenario.target_modality + "' is not in the dataset");
  }
  if (cfg.scenario.kind == ScenarioKind::Merge) {
    for (double level : cfg.missing_levels) {
      if (level * static_cast<double>(n) > static_cast<double>(n - 1)) {
        config_error("merge level " + std::to_string(level) + " is infeasible for " + std::to_string(n) +
                     " modalities (max (N-1)/N); remove it from missing_levels");
      }
    }
  }
}

}  // namespace

ScoreTable load_dataset(const DatasetSource& source) {
  if (source.synth) return generate(*source.synth);
  ScoreTable table;
  switch (source.format) {
    case FileFormat::LongCsv: table = read_long_csv(source.paths.at(0), source.modalities); break;
    case FileFormat::WideCsv: table = read_wide_csv(source.paths.at(0)); break;
    case FileFormat::Bssr1MatrixSet:
      table = read_bssr1_matrix_set(source.paths, source.modalities, source.gallery_size);
      break;
  }
  if (source.validate_bssr1) validate_inventory(table, kBssr1Set1Inventory);
  return table;
}

// ---------------------------------------------------------------------------
// Grid

std::uint64_t split_seed(std::uint64_t master, int rep) {
  return derive_seed({master, kSplitTag, static_cast<std::uint64_t>(rep)});
}

std::uint64_t mask_seed(std::uint64_t master, double level, int rep) {
  const auto key = static_cast<std::uint64_t>(std::llround(level * 1e9));
  return derive_seed({master, kMaskTag, key, static_cast<std::uint64_t>(rep)});
}

void aggregate(MethodResult& result) {
  std::vector<const Metrics*> ok;
  for (const auto& r : result.reps) {
    if (r.metrics) ok.push_back(&*r.metrics);
  }
  result.reps_evaluated = ok.size();
  result.mean.reset();
  result.sd.reset();
  if (ok.empty()) return;

  auto reduce = [&](auto get) {
    std::vector<double> values;
    for (const Metrics* m : ok) values.push_back(get(*m));
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };
  Metrics mean, sd;
  std::tie(mean.auc, sd.auc) = reduce([](const Metrics& m) { return m.auc; });
  std::tie(mean.eer, sd.eer) = reduce([](const Metrics& m) { return m.eer; });
  for (std::size_t i = 0; i < ok.front()->tpr_at_fpr.size(); ++i) {
    auto [m, s] = reduce([i](const Metrics& x) { return x.tpr_at_fpr.at(i); });
    mean.tpr_at_fpr.push_back(m);
    sd.tpr_at_fpr.push_back(s);
  }
  for (std::size_t i = 0; i < ok.front()->rank_accuracy.size(); ++i) {
    auto [m, s] = reduce([i](const Metrics& x) { return x.rank_accuracy.at(i); });
    mean.rank_accuracy.push_back(m);
    sd.rank_accuracy.push_back(s);
  }
  result.mean = std::move(mean);
  result.sd = std::move(sd);
}

namespace {

struct RepSetup {
  DataSplit split;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  ScoreTable normalized;
  std::uint64_t split_seed = 0;
};

std::string level_tag(double level) { return format_score(level); }

struct Evaluation {
  Metrics metrics;
  std::size_t rows = 0;
  std::size_t probes = 0;
  RocCurve roc;
  CmcCurve cmc;
};

Evaluation evaluate(const FusedScores& fused, const EvalOptions& options) {
  Evaluation ev;
  ev.roc = roc(fused);
  ev.cmc = cmc(fused, options.max_rank);
  ev.metrics.auc = ev.roc.auc;
  ev.metrics.eer = ev.roc.eer;
  for (double f : options.fpr_points) ev.metrics.tpr_at_fpr.push_back(tpr_at_fpr(ev.roc, f));
  ev.metrics.rank_accuracy = ev.cmc.accuracy;
  ev.rows = fused.rows.size();
  ev.probes = ev.cmc.probes;
  return ev;
}

// Listwise deletion can drop a probe's genuine row or every row of a class.
// Probes without a surviving mate are left out of identification; a cell
// without both classes is recorded as not evaluable.
std::optional<Evaluation> evaluate_listwise(FusedScores fused, const EvalOptions& options, std::string& status) {
  std::unordered_map<std::string, int> mates;
  for (const auto& r : fused.rows) mates[r.probe_id] += r.label == Label::Genuine ? 1 : 0;
  std::size_t genuine = 0, impostor = 0;
  for (const auto& r : fused.rows) (r.label == Label::Genuine ? genuine : impostor) += 1;
  if (genuine == 0 || impostor == 0) {
    status = "not_evaluable: listwise deletion left " + std::to_string(genuine) + " genuine and " +
             std::to_string(impostor) + " impostor rows";
    return std::nullopt;
  }
  Evaluation ev;
  ev.roc = roc(fused);
  FusedScores ranked;
  ranked.provenance = fused.provenance;
  for (auto& r : fused.rows) {
    if (mates[r.probe_id] > 0) ranked.rows.push_back(r);
  }
  ev.cmc = cmc(ranked, options.max_rank);
  ev.metrics.auc = ev.roc.auc;
  ev.metrics.eer = ev.roc.eer;
  for (double f : options.fpr_points) ev.metrics.tpr_at_fpr.push_back(tpr_at_fpr(ev.roc, f));
  ev.metrics.rank_accuracy = ev.cmc.accuracy;
  ev.rows = fused.rows.size();
  ev.probes = ev.cmc.probes;
  return ev;
}

void write_curves(const fs::path& dir, const std::string& level, int rep, const std::string& method,
                  const Evaluation& ev) {
  const std::string stem = level + "_" + std::to_string(rep) + "_" + method + ".csv";
  write_roc_csv(ev.roc, dir / ("roc_" + stem));
  write_cmc_csv(ev.cmc, dir / ("cmc_" + stem));
}

MaskPlan build_plan(const ExperimentConfig& cfg, const ScoreTable& table, const DataSplit& split, double level,
                    std::uint64_t seed) {
  switch (cfg.scenario.kind) {
    case ScenarioKind::AddModality: return plan_add_modality(table, *cfg.scenario.target_modality, level, seed);
    case ScenarioKind::Merge: return plan_merge(table, level, seed);
    case ScenarioKind::Retire: return plan_retire(table, split, *cfg.scenario.target_modality, level, seed);
  }
  throw Error(ErrorKind::InvalidSpec, "unknown scenario");
}

// All methods of one (level, rep) cell share the mask, split and
// normalization.
std::vector<RepResult> run_cell(const ExperimentConfig& cfg, const RepSetup& setup, double level, int rep,
                                bool write_artifacts) {
  const std::uint64_t seed = mask_seed(cfg.master_seed, level, rep);
  std::string method = "mask";
  try {
    const MaskPlan plan = build_plan(cfg, setup.normalized, setup.split, level, seed);
    const ScoreTable masked = apply(setup.normalized, plan);
    const ScoreTable test = masked.subset(setup.test_rows);

    std::vector<RepResult> out;
    for (const auto& entry : cfg.roster) {
      method = entry.name();
      RepResult result;
      result.rep = rep;
      result.split_seed = setup.split_seed;
      result.mask_seed = seed;

      std::optional<Evaluation> ev;
      switch (entry.kind) {
        case RosterEntry::Kind::NoImputation: {
          FusedScores fused = fuse_simple_sum(test, true);
          ev = evaluate(fused, cfg.eval);
          break;
        }
        case RosterEntry::Kind::Listwise: {
          FusedScores fused = fuse_simple_sum(listwise_delete(test), false);
          fused.provenance = "listwise";
          ev = evaluate_listwise(std::move(fused), cfg.eval, result.status);
          break;
        }
        case RosterEntry::Kind::Retrain: {
          const std::size_t target = test.modalities().require(*cfg.scenario.target_modality);
          std::vector<std::size_t> keep;
          for (std::size_t m = 0; m < test.modality_count(); ++m) {
            if (m != target) keep.push_back(m);
          }
          FusedScores fused = fuse_simple_sum(test.select_modalities(keep), true);
          ev = evaluate(fused, cfg.eval);
          break;
        }
        case RosterEntry::Kind::Impute: {
          const FittedImputer fitted = fit_imputer(masked, setup.train_rows, entry.spec);
          if (entry.spec.method == ImputeMethod::Iterative) result.convergence = fitted.convergence;
          FusedScores fused = fuse_simple_sum(apply_imputer(test, fitted), false);
          fused.provenance = "imputed:" + method;
          ev = evaluate(fused, cfg.eval);
          break;
        }
      }
      if (ev) {
        result.metrics = ev->metrics;
        result.rows_evaluated = ev->rows;
        result.probes_evaluated = ev->probes;
        if (write_artifacts) write_curves(cfg.output_dir, level_tag(level), rep, method, *ev);
      }
      out.push_back(std::move(result));
    }
    return out;
  } catch (const Error& e) {
    throw Error(ErrorKind::CellFailure, "cell (level=" + level_tag(level) + ", rep=" + std::to_string(rep) +
                                            ", method=" + method + "): " + e.what());
  }
}

// Runs task(i) for i in [0, count) on up to `jobs` threads and rethrows the
// failure with the lowest index, so errors do not depend on scheduling.
template <typename Task>
void parallel_for(std::size_t count, unsigned jobs, Task&& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for '" + path.string() + "'");
}

}  // namespace

EvalReport run(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  return run(config, load_dataset(config.dataset), options);
}

EvalReport run(const ExperimentConfig& config, const ScoreTable& table, const RunOptions& options) {
  validate(config);
  validate_against(config, table);
  const unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  if (options.write_artifacts) {
    if (config.output_dir.empty()) config_error("output_dir is required to write artifacts");
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create '" + config.output_dir.string() + "': " + ec.message());
  }

  const auto reps = static_cast<std::size_t>(config.repetitions);
  std::vector<RepSetup> setups(reps);
  EvalReport report;
  report.config = to_json(config);
  report.config_hash = fnv1a_hex(report.config.dump());
  report.baseline.method = "complete";
  report.baseline.reps.resize(reps);

  parallel_for(reps, jobs, [&](std::size_t r) {
    const int rep = static_cast<int>(r);
    try {
      RepSetup& s = setups[r];
      s.split_seed = split_seed(config.master_seed, rep);
      s.split = split_by_probe(table, config.split_fraction, s.split_seed);
      s.train_rows = s.split.train_rows(table);
      s.test_rows = s.split.test_rows(table);
      s.normalized = transform(table, fit_normalization(table, s.train_rows));

      const FusedScores fused = fuse_simple_sum(s.normalized.subset(s.test_rows), true);
      const Evaluation ev = evaluate(fused, config.eval);
      RepResult& out = report.baseline.reps[r];
      out.rep = rep;
      out.split_seed = s.split_seed;
      out.metrics = ev.metrics;
      out.rows_evaluated = ev.rows;
      out.probes_evaluated = ev.probes;
      if (options.write_artifacts) write_curves(config.output_dir, "baseline", rep, "complete", ev);
    } catch (const Error& e) {
      throw Error(ErrorKind::CellFailure, "repetition " + std::to_string(rep) + " setup: " + e.what());
    }
  });
  aggregate(report.baseline);

  const std::size_t levels = config.missing_levels.size();
  std::vector<std::vector<RepResult>> cells(levels * reps);
  parallel_for(levels * reps, jobs, [&](std::size_t i) {
    const std::size_t l = i / reps, r = i % reps;
    cells[i] = run_cell(config, setups[r], config.missing_levels[l], static_cast<int>(r), options.write_artifacts);
  });

  for (std::size_t l = 0; l < levels; ++l) {
    LevelResult level{config.missing_levels[l], {}};
    for (std::size_t e = 0; e < config.roster.size(); ++e) {
      MethodResult m;
      m.method = config.roster[e].name();
      for (std::size_t r = 0; r < reps; ++r) m.reps.push_back(cells[l * reps + r][e]);
      aggregate(m);
      level.methods.push_back(std::move(m));
    }
    report.levels.push_back(std::move(level));
  }

  if (options.write_artifacts) {
    write_text(config.output_dir / "report.json", to_json(report).dump(2) + "\n");
    write_text(config.output_dir / "summary.csv", summarize_csv(report));
    write_text(config.output_dir / "summary.txt", summarize_text(report));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report JSON

namespace {

json metrics_json(const Metrics& m) {
  return {{"auc", m.auc}, {"eer", m.eer}, {"tpr_at_fpr", m.tpr_at_fpr}, {"rank_accuracy", m.rank_accuracy}};
}

Metrics metrics_from(const json& j) {
  return Metrics{j.at("auc").get<double>(), j.at("eer").get<double>(), j.at("tpr_at_fpr").get<std::vector<double>>(),
                 j.at("rank_accuracy").get<std::vector<double>>()};
}

json method_json(const MethodResult& m) {
  json reps = json::array();
  for (const auto& r : m.reps) {
    json jr{{"rep", r.rep},
            {"split_seed", r.split_seed},
            {"mask_seed", r.mask_seed},
            {"status", r.status},
            {"rows_evaluated", r.rows_evaluated},
            {"probes_evaluated", r.probes_evaluated},
            {"metrics", r.metrics ? metrics_json(*r.metrics) : json(nullptr)}};
    if (r.convergence) {
      jr["convergence"] = {{"iterations_run", r.convergence->iterations_run},
                           {"final_max_delta", r.convergence->final_max_delta},
                           {"converged", r.convergence->converged}};
    }
    reps.push_back(std::move(jr));
  }
  return {{"method", m.method},
          {"reps_evaluated", m.reps_evaluated},
          {"mean", m.mean ? metrics_json(*m.mean) : json(nullptr)},
          {"sd", m.sd ? metrics_json(*m.sd) : json(nullptr)},
          {"per_rep", reps}};
}

MethodResult method_from(const json& j) {
  MethodResult m;
  m.method = j.at("method").get<std::string>();
  m.reps_evaluated = j.at("reps_evaluated").get<std::size_t>();
  if (!j.at("mean").is_null()) m.mean = metrics_from(j.at("mean"));
  if (!j.at("sd").is_null()) m.sd = metrics_from(j.at("sd"));
  for (const auto& jr : j.at("per_rep")) {
    RepResult r;
    r.rep = jr.at("rep").get<int>();
    r.split_seed = jr.at("split_seed").get<std::uint64_t>();
    r.mask_seed = jr.at("mask_seed").get<std::uint64_t>();
    r.status = jr.at("status").get<std::string>();
    r.rows_evaluated = jr.at("rows_evaluated").get<std::size_t>();
    r.probes_evaluated = jr.at("probes_evaluated").get<std::size_t>();
    if (!jr.at("metrics").is_null()) r.metrics = metrics_from(jr.at("metrics"));
    if (jr.contains("convergence")) {
      const json& c = jr.at("convergence");
      r.convergence = Convergence{c.at("iterations_run").get<int>(), c.at("final_max_delta").get<double>(),
                                  c.at("converged").get<bool>()};
    }
    m.reps.push_back(std::move(r));
  }
  return m;
}

}  // namespace

json to_json(const EvalReport& report) {
  json levels = json::array();
  for (const auto& l : report.levels) {
    json methods = json::array();
    for (const auto& m : l.methods) methods.push_back(method_json(m));
    levels.push_back({{"level", l.level}, {"methods", methods}});
  }
  return {{"schema", "mbfuse-report/1"},   {"tool_version", report.tool_version},
          {"config_hash", report.config_hash}, {"config", report.config},
          {"baseline", method_json(report.baseline)}, {"levels", levels}};
}

EvalReport report_from_json(const json& j) {
  try {
    if (j.value("schema", std::string{}) != "mbfuse-report/1") {
      throw Error(ErrorKind::InvalidSpec, "not an mbfuse report (schema mbfuse-report/1)");
    }
    EvalReport report;
    report.tool_version = j.at("tool_version").get<std::string>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.config = j.at("config");
    report.baseline = method_from(j.at("baseline"));
    for (const auto& jl : j.at("levels")) {
      LevelResult l{jl.at("level").get<double>(), {}};
      for (const auto& jm : jl.at("methods")) l.methods.push_back(method_from(jm));
      report.levels.push_back(std::move(l));
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("report: ") + e.what());
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mbfuse
