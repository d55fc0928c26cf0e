#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbfuse/score_model.hpp"

namespace mbfuse {

struct Gaussian {
  double mean = 0.0;
  double sd = 0.0;
};

struct SynthModality {
  std::string name;
  Gaussian genuine;
  Gaussian impostor;
};

/// Synthetic score population. Every score is
/// clip(mean + sd * (sqrt(rho) * z_row + sqrt(1 - rho) * z_cell), 0, 1)
/// with one shared z_row per comparison row.
struct SynthSpec {
  std::size_t n_identities = 0;
  std::vector<SynthModality> modalities;
  double rho = 0.0;
  std::uint64_t seed = 0;
};

/// Throws InvalidSpec.
void validate(const SynthSpec& spec);

/// n_identities^2 rows, probe-major; identity i is named "id<i>" zero-padded.
ScoreTable generate(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);

}  // namespace mbfuse
