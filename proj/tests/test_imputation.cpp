#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbfuse/imputation.hpp"
#include "mbfuse/normalization.hpp"
#include "mbfuse/scenarios.hpp"

using namespace mbfuse;
using fixture::thrown;

namespace {

std::vector<std::size_t> all_rows(const ScoreTable& t) {
  std::vector<std::size_t> r(t.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
  return r;
}

ScoreTable normalized(ScoreTable t) {
  t.set_normalized(true);
  return t;
}

ImputerSpec iterative(RegressorKind kind) {
  ImputerSpec s;
  s.method = ImputeMethod::Iterative;
  s.regressor = kind;
  return s;
}

// Masked, normalized synthetic table.
ScoreTable masked_synth(std::size_t n, double rho, double level, std::uint64_t seed) {
  const ScoreTable t = generate(fixture::synth_spec(n, 4, rho, seed));
  return normalized(apply(t, plan_merge(t, level, seed + 1)));
}

// Present cells of `before` must be bit-identical in `after`.
void check_present_unchanged(const ScoreTable& before, const ScoreTable& after) {
  REQUIRE(before.size() == after.size());
  for (std::size_t r = 0; r < before.size(); ++r) {
    for (std::size_t m = 0; m < before.modality_count(); ++m) {
      if (before.score(r, m)) CHECK(*after.score(r, m) == *before.score(r, m));
    }
  }
}

}  // namespace

TEST_CASE("mean imputation of the demo table") {
  const ScoreTable t = normalized(fixture::table_one());
  const auto [filled, fitted] = impute_mean(t, all_rows(t));
  CHECK(*filled.score(0, 0) == (0.41 + 0.27 + 0.85) / 3);
  CHECK(std::abs(*filled.score(0, 0) - 0.51) < 1e-10);
  CHECK(std::abs(*filled.score(2, 1) - 1.63 / 3) < 1e-10);
  CHECK(filled.missing_count() == 0);
  check_present_unchanged(t, filled);
}

TEST_CASE("median imputation of the demo table") {
  const ScoreTable t = normalized(fixture::table_one());
  const auto [filled, fitted] = impute_median(t, all_rows(t));
  CHECK(*filled.score(2, 1) == 0.74);
  CHECK(*filled.score(0, 0) == 0.41);
}

TEST_CASE("median of an even count and single-value columns") {
  const ScoreTable t = normalized(
      build_table(ModalitySet({"a", "b"}), {{"p", "p", {0.2, 0.9}}, {"q", "q", {0.4, std::nullopt}}, {"r", "r", {std::nullopt, 0.5}}}));
  const auto [med, f1] = impute_median(t, all_rows(t));
  CHECK(*med.score(2, 0) == doctest::Approx(0.3).epsilon(1e-15));
  const ScoreTable single = normalized(
      build_table(ModalitySet({"a", "b"}), {{"p", "p", {0.6, 0.1}}, {"q", "q", {std::nullopt, 0.2}}, {"r", "r", {std::nullopt, 0.5}}}));
  const auto [mean, f2] = impute_mean(single, all_rows(single));
  CHECK(*mean.score(1, 0) == 0.6);
  CHECK(*mean.score(2, 0) == 0.6);
}

TEST_CASE("column statistics use training rows only") {
  const ScoreTable t = normalized(fixture::table_one());
  const std::vector<std::size_t> train{0, 1};  // face only present in row 1
  const auto [filled, fitted] = impute_mean(t, train);
  CHECK(*filled.score(0, 0) == 0.41);
  CHECK(*filled.score(2, 1) == (0.74 + 0.89) / 2);
}

TEST_CASE("preconditions") {
  const ScoreTable raw = build_table(ModalitySet({"a", "b"}), {{"p", "p", {2.0, 0.5}}, {"q", "q", {std::nullopt, 0.5}}});
  CHECK(thrown([&] { impute_mean(raw, all_rows(raw)); }) == ErrorKind::NotNormalized);
  const ScoreTable gap = normalized(build_table(ModalitySet({"a", "b"}), {{"p", "p", {std::nullopt, 0.5}}, {"q", "q", {0.3, 0.5}}}));
  const std::vector<std::size_t> train{0};
  CHECK(thrown([&] { impute_mean(gap, train); }) == ErrorKind::EmptyColumn);
  CHECK(thrown([&] { fit_iterative(gap, all_rows(gap), iterative(RegressorKind::Knn)); }) ==
        ErrorKind::NotEnoughObservedRows);
}

TEST_CASE("listwise deletion") {
  const ScoreTable t = fixture::table_one();
  const ScoreTable l = listwise_delete(t);
  REQUIRE(l.size() == 2);
  CHECK(l.row(0).probe_id == "s2");
  CHECK(l.row(1).probe_id == "s4");
  const ScoreTable full = generate(fixture::synth_spec(5, 2, 0.0, 1));
  CHECK(listwise_delete(full) == full);
}

TEST_CASE("iterative on complete data is a single vacuous sweep") {
  const ScoreTable t = normalized(generate(fixture::synth_spec(15, 3, 0.5, 2)));
  for (auto kind : {RegressorKind::BayesianRidge, RegressorKind::Cart, RegressorKind::Knn}) {
    const FittedImputer f = fit_iterative(t, all_rows(t), iterative(kind));
    CHECK(f.convergence.iterations_run == 1);
    CHECK(f.convergence.converged);
    CHECK(f.convergence.final_max_delta == 0.0);
    CHECK(apply_iterative(t, f) == t);
  }
}

TEST_CASE("iterative converges on strongly correlated data") {
  const ScoreTable t = masked_synth(60, 0.9, 0.3, 3);
  const FittedImputer f = fit_iterative(t, all_rows(t), iterative(RegressorKind::BayesianRidge));
  CHECK(f.convergence.converged);
  CHECK(f.convergence.iterations_run <= 10);
  CHECK(f.convergence.final_max_delta < 1e-3);
  // Piecewise-constant regressors may cycle between sweeps; the flag must
  // then report it honestly.
  for (auto kind : {RegressorKind::Cart, RegressorKind::Knn}) {
    const FittedImputer g = fit_iterative(t, all_rows(t), iterative(kind));
    CHECK(g.convergence.iterations_run <= 10);
    CHECK(g.convergence.converged == (g.convergence.final_max_delta < 1e-3));
  }
}

TEST_CASE("uncorrelated data imputes close to the column mean") {
  // Near-identical classes so that nothing but rho could link the columns.
  SynthSpec spec = fixture::synth_spec(60, 4, 0.0, 4);
  for (auto& m : spec.modalities) m.genuine = {0.31, 0.1};
  const ScoreTable full = generate(spec);
  const ScoreTable t = normalized(apply(full, plan_merge(full, 0.3, 5)));
  const auto [by_mean, fm] = impute_mean(t, all_rows(t));
  const FittedImputer f = fit_iterative(t, all_rows(t), iterative(RegressorKind::BayesianRidge));
  const ScoreTable it = apply_iterative(t, f);
  double worst = 0.0, total = 0.0;
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (std::size_t m = 0; m < 4; ++m) {
      if (t.score(r, m)) continue;
      const double d = std::abs(*it.score(r, m) - *by_mean.score(r, m));
      worst = std::max(worst, d);
      total += d;
    }
  }
  // Score s.d. is 0.1.
  CHECK(worst < 0.05);
  CHECK(total / static_cast<double>(t.missing_count()) < 0.01);
}

TEST_CASE("every imputer fills, clamps and preserves present cells") {
  const ScoreTable t = masked_synth(40, 0.6, 0.5, 5);
  const DataSplit split = split_by_probe(t, 0.8, 6);
  const ScoreTable test = t.subset(split.test_rows(t));
  std::vector<ImputerSpec> specs(2);
  specs[1].method = ImputeMethod::Median;
  for (auto kind : {RegressorKind::BayesianRidge, RegressorKind::Cart, RegressorKind::Knn}) specs.push_back(iterative(kind));
  for (const auto& spec : specs) {
    CAPTURE(spec.name());
    const FittedImputer f = fit_imputer(t, split.train_rows(t), spec);
    const ScoreTable out = apply_imputer(test, f);
    CHECK(out.missing_count() == 0);
    check_present_unchanged(test, out);
    for (const auto& r : out.rows()) {
      for (const auto& s : r.scores) CHECK((*s >= 0.0 && *s <= 1.0));
    }
    // Frozen imputer is deterministic and survives serialization.
    CHECK(apply_imputer(test, f) == out);
    const FittedImputer back = fitted_imputer_from_json(nlohmann::json::parse(to_json(f).dump()));
    CHECK(apply_imputer(test, back) == out);
  }
}

TEST_CASE("single missing cell uses the regressor prediction") {
  const ScoreTable train = masked_synth(30, 0.7, 0.2, 7);
  const FittedImputer f = fit_iterative(train, all_rows(train), iterative(RegressorKind::BayesianRidge));
  const ScoreTable probe = normalized(build_table(train.modalities(), {{"x", "x", {0.2, std::nullopt, 0.6, 0.9}}}));
  const ScoreTable out = apply_iterative(probe, f);
  const std::vector<double> features{0.2, 0.6, 0.9};
  const double expect = std::clamp(predict(f.regressors[1], features), 0.0, 1.0);
  CHECK(*out.score(0, 1) == expect);
}

TEST_CASE("imputer spec json and names") {
  ImputerSpec s = iterative(RegressorKind::Knn);
  s.knn_k = 7;
  CHECK(s.name() == "iterative_knn");
  const ImputerSpec back = imputer_spec_from_json(to_json(s));
  CHECK(back.knn_k == 7);
  CHECK(back.regressor == RegressorKind::Knn);
  CHECK(thrown([] { imputer_spec_from_json({{"method", "mean"}, {"k", 3}}); }).has_value());
  CHECK(thrown([] { imputer_spec_from_json({{"method", "iterative"}, {"bogus", 3}}); }).has_value());
  CHECK(thrown([] { imputer_spec_from_json({{"method", "magic"}}); }).has_value());
  ImputerSpec bad = iterative(RegressorKind::Knn);
  bad.knn_k = 0;
  CHECK(thrown([&] { validate(bad); }) == ErrorKind::InvalidSpec);
}
