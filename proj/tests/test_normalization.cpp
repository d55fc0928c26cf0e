#include "doctest.h"
#include "fixtures.hpp"
#include "mbfuse/normalization.hpp"

using namespace mbfuse;
using fixture::thrown;

namespace {

ScoreTable column(std::vector<double> values) {
  std::vector<RawRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({"p" + std::to_string(i), "g", {values[i]}});
  return build_table(ModalitySet({"a"}), rows);
}

std::vector<std::size_t> first(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

}  // namespace

TEST_CASE("min-max fitted on the training rows") {
  const ScoreTable t = column({2, 4, 10, 12, 2});
  const NormParams p = fit_normalization(t, first(3));
  CHECK(p.min[0] == 2);
  CHECK(p.max[0] == 10);
  CHECK(p.fitted_on[0] == 3);
  const ScoreTable n = transform(t, p);
  CHECK(n.normalized());
  CHECK(*n.score(0, 0) == 0.0);
  CHECK(*n.score(1, 0) == 0.25);
  CHECK(*n.score(3, 0) == 1.0);  // 12 clamps
}

TEST_CASE("degenerate modality") {
  CHECK(thrown([] { fit_normalization(column({5, 5, 5}), first(3)); }) == ErrorKind::DegenerateModality);
  CHECK(thrown([] { fit_normalization(column({5, 6}), first(1)); }) == ErrorKind::DegenerateModality);
}

TEST_CASE("missing cells stay missing and the input is untouched") {
  const ScoreTable t = fixture::table_one();
  const ScoreTable before = t;
  const ScoreTable n = transform(t, fit_normalization(t, first(4)));
  CHECK(t == before);
  CHECK_FALSE(n.score(0, 0).has_value());
  CHECK_FALSE(n.score(2, 1).has_value());
  CHECK(n.missing_count() == 2);
  for (const auto& r : n.rows()) {
    for (const auto& s : r.scores) {
      if (s) CHECK((*s >= 0.0 && *s <= 1.0));
    }
  }
}

TEST_CASE("refit on the same split is identical") {
  const ScoreTable t = generate(fixture::synth_spec(40, 3, 0.1, 2));
  const DataSplit s = split_by_probe(t, 0.8, 4);
  CHECK(fit_normalization(t, s.train_rows(t)) == fit_normalization(t, s.train_rows(t)));
}

TEST_CASE("shape mismatch and json") {
  const ScoreTable t = fixture::table_one();
  const NormParams p = fit_normalization(t, first(4));
  CHECK(thrown([&] { transform(column({1, 2}), p); }) == ErrorKind::ShapeMismatch);
  CHECK(norm_params_from_json(to_json(p)) == p);
}
