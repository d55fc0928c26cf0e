#include <cmath>
#include <limits>

#include "doctest.h"
#include "fixtures.hpp"
#include "mbfuse/rng.hpp"
#include "mbfuse/synth.hpp"

using namespace mbfuse;
using fixture::thrown;

TEST_CASE("demo table has four rows and ten present scores") {
  const ScoreTable t = fixture::table_one();
  CHECK(t.size() == 4);
  CHECK(t.genuine_count() == 4);
  CHECK(t.missing_count() == 2);
  std::size_t present = 0;
  for (std::size_t m = 0; m < t.modality_count(); ++m) present += t.present_count(m);
  CHECK(present == 10);
  CHECK_FALSE(t.score(0, 0).has_value());
  CHECK(*t.score(3, 1) == 0.0);
}

TEST_CASE("empty row list gives an empty table") {
  const ScoreTable t = build_table(ModalitySet({"a", "b"}), {});
  CHECK(t.empty());
  CHECK(t.genuine_count() == 0);
}

TEST_CASE("build_table rejects bad rows") {
  const ModalitySet ms({"a", "b"});
  CHECK(thrown([&] { build_table(ms, {{"p", "g", {std::nullopt, std::nullopt}}}); }) ==
        ErrorKind::AllScoresMissing);
  CHECK(thrown([&] { build_table(ms, {{"p", "g", {0.1, 0.2}}, {"p", "g", {0.3, 0.4}}}); }) ==
        ErrorKind::DuplicatePair);
  CHECK(thrown([&] { build_table(ms, {{"p", "g", {std::nan(""), 0.2}}}); }) == ErrorKind::NonFiniteScore);
  CHECK(thrown([&] { build_table(ms, {{"p", "g", {std::numeric_limits<double>::infinity(), 0.2}}}); }) ==
        ErrorKind::NonFiniteScore);
  CHECK(thrown([&] { build_table(ms, {{"p", "g", {0.1}}}); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("labels follow id equality") {
  const ScoreTable t = build_table(ModalitySet({"a"}), {{"x", "x", {0.1}}, {"x", "y", {0.2}}});
  CHECK(t.row(0).label == Label::Genuine);
  CHECK(t.row(1).label == Label::Impostor);
  CHECK(t.impostor_count() == 1);
}

TEST_CASE("modality set rejects duplicates and unknown names") {
  CHECK(thrown([] { ModalitySet({"a", "a"}); }).has_value());
  CHECK(thrown([] { ModalitySet(std::vector<std::string>{}); }).has_value());
  const ModalitySet ms({"a", "b"});
  CHECK(ms.require("b") == 1);
  CHECK(thrown([&] { ms.require("c"); }) == ErrorKind::UnknownModality);
}

TEST_CASE("set_score rejects non-finite values") {
  ScoreTable t = fixture::table_one();
  CHECK(thrown([&] { t.set_score(0, 0, std::nan("")); }) == ErrorKind::NonFiniteScore);
  t.set_score(0, 0, 0.5);
  CHECK(*t.score(0, 0) == 0.5);
}

TEST_CASE("split of 517 identities at 0.8") {
  SynthSpec spec = fixture::synth_spec(517, 1, 0.0, 3);
  // Only ids matter here; a one-modality 517x517 table is cheap enough.
  const ScoreTable t = generate(spec);
  const DataSplit s = split_by_probe(t, 0.8, 42);
  CHECK((s.train_probe_ids.size() == 413 || s.train_probe_ids.size() == 414));
  CHECK(s.train_probe_ids.size() + s.test_probe_ids.size() == 517);
}

TEST_CASE("split properties") {
  const ScoreTable two = generate(fixture::synth_spec(2, 2, 0.0, 1));
  const DataSplit s = split_by_probe(two, 0.5, 9);
  CHECK(s.train_probe_ids.size() == 1);
  CHECK(s.test_probe_ids.size() == 1);

  const ScoreTable t = generate(fixture::synth_spec(30, 2, 0.0, 1));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DataSplit a = split_by_probe(t, 0.7, seed);
    const DataSplit b = split_by_probe(t, 0.7, seed);
    CHECK(a.train_probe_ids == b.train_probe_ids);
    for (const auto& id : a.train_probe_ids) CHECK(a.test_probe_ids.count(id) == 0);
    // Every row lands on exactly one side.
    CHECK(a.train_rows(t).size() + a.test_rows(t).size() == t.size());
    for (std::size_t r : a.test_rows(t)) CHECK(a.test_probe_ids.count(t.row(r).probe_id) == 1);
  }
  CHECK(thrown([&] { split_by_probe(t, 1.0, 0); }) == ErrorKind::InvalidSpec);
  CHECK(thrown([&] { split_by_probe(t, 0.0, 0); }) == ErrorKind::InvalidSpec);
  const ScoreTable one = build_table(ModalitySet({"a"}), {{"p", "p", {0.5}}, {"p", "q", {0.2}}});
  CHECK(thrown([&] { split_by_probe(one, 0.5, 0); }) == ErrorKind::TooFewIdentities);
}

TEST_CASE("subset and select_modalities") {
  const ScoreTable t = fixture::table_one();
  const std::vector<std::size_t> rows{3, 1};
  const ScoreTable s = t.subset(rows);
  CHECK(s.size() == 2);
  CHECK(s.row(0).probe_id == "s4");
  const std::vector<std::size_t> cols{2, 0};
  const ScoreTable c = t.select_modalities(cols);
  CHECK(c.modalities().names() == std::vector<std::string>{"iris", "face"});
  CHECK(*c.score(1, 0) == 0.47);
}

TEST_CASE("derive_seed is order sensitive and stable") {
  CHECK(derive_seed({1, 2}) != derive_seed({2, 1}));
  CHECK(derive_seed({1, 2}) == derive_seed({1, 2}));
  CHECK(derive_seed({0}) != derive_seed({0, 0}));
}

TEST_CASE("rng helpers") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(rng.below(7) < 7);
  }
  Rng a(11);
  auto s = sample_without_replacement(a, 50, 50);
  std::sort(s.begin(), s.end());
  for (std::uint64_t i = 0; i < 50; ++i) CHECK(s[i] == i);
}
