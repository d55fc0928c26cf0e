#include "mbfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mbfuse/error.hpp"
#include "mbfuse/rng.hpp"

namespace mbfuse {

using nlohmann::json;

void validate(const SynthSpec& spec) {
  if (spec.n_identities < 2) throw Error(ErrorKind::InvalidSpec, "n_identities must be >= 2");
  if (spec.modalities.empty()) throw Error(ErrorKind::InvalidSpec, "at least one modality required");
  if (!(spec.rho >= 0.0 && spec.rho < 1.0)) throw Error(ErrorKind::InvalidSpec, "rho must lie in [0, 1)");
  for (const auto& m : spec.modalities) {
    const std::string tag = "modality '" + m.name + "'";
    for (const Gaussian* g : {&m.genuine, &m.impostor}) {
      if (!std::isfinite(g->mean) || !std::isfinite(g->sd) || g->sd < 0.0) {
        throw Error(ErrorKind::InvalidSpec, tag + ": means must be finite and s.d. non-negative");
      }
    }
    if (!(m.genuine.mean > m.impostor.mean)) {
      throw Error(ErrorKind::InvalidSpec, tag + ": genuine mean must exceed impostor mean");
    }
  }
  std::vector<std::string> names;
  for (const auto& m : spec.modalities) names.push_back(m.name);
  ModalitySet check(std::move(names));
}

ScoreTable generate(const SynthSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n_identities;
  const std::size_t mods = spec.modalities.size();
  const int width = static_cast<int>(std::to_string(n - 1).size());
  auto id = [width](std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "id%0*zu", width, i);
    return std::string(buf);
  };
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = id(i);

  const double shared = std::sqrt(spec.rho);
  const double own = std::sqrt(1.0 - spec.rho);

  std::vector<RawRow> rows;
  rows.reserve(n * n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t g = 0; g < n; ++g) {
      // Each row draws from its own stream so the table does not depend on
      // generation order.
      Rng rng(derive_seed({spec.seed, p * n + g}));
      const double z_row = rng.normal();
      RawRow row{ids[p], ids[g], std::vector<Score>(mods)};
      for (std::size_t m = 0; m < mods; ++m) {
        const Gaussian& dist = p == g ? spec.modalities[m].genuine : spec.modalities[m].impostor;
        const double z = shared * z_row + own * rng.normal();
        row.scores[m] = std::clamp(dist.mean + dist.sd * z, 0.0, 1.0);
      }
      rows.push_back(std::move(row));
    }
  }
  std::vector<std::string> names;
  for (const auto& m : spec.modalities) names.push_back(m.name);
  return build_table(ModalitySet(std::move(names)), std::move(rows));
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidSpec, where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed) ok = ok || item.key() == key;
    if (!ok) throw Error(ErrorKind::InvalidSpec, where + ": unknown key '" + item.key() + "'");
  }
}

Gaussian gaussian_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"mean", "sd"}, where);
  return Gaussian{j.at("mean").get<double>(), j.at("sd").get<double>()};
}

}  // namespace

SynthSpec synth_spec_from_json(const json& j) {
  try {
    reject_unknown(j, {"n_identities", "modalities", "rho", "seed"}, "synth spec");
    SynthSpec spec;
    spec.n_identities = j.at("n_identities").get<std::size_t>();
    spec.rho = j.value("rho", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& m : j.at("modalities")) {
      reject_unknown(m, {"name", "genuine", "impostor"}, "synth modality");
      const std::string name = m.at("name").get<std::string>();
      spec.modalities.push_back(SynthModality{name, gaussian_from_json(m.at("genuine"), name + ".genuine"),
                                              gaussian_from_json(m.at("impostor"), name + ".impostor")});
    }
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, e.what());
  }
}

json to_json(const SynthSpec& spec) {
  json mods = json::array();
  for (const auto& m : spec.modalities) {
    mods.push_back({{"name", m.name},
                    {"genuine", {{"mean", m.genuine.mean}, {"sd", m.genuine.sd}}},
                    {"impostor", {{"mean", m.impostor.mean}, {"sd", m.impostor.sd}}}});
  }
  return {{"n_identities", spec.n_identities}, {"modalities", mods}, {"rho", spec.rho}, {"seed", spec.seed}};
}

}  // namespace mbfuse
