#include "mbfuse/normalization.hpp"

#include <algorithm>
#include <limits>

#include "mbfuse/error.hpp"

namespace mbfuse {

using nlohmann::json;

NormParams fit_normalization(const ScoreTable& table, std::span<const std::size_t> train_rows) {
  const std::size_t n = table.modality_count();
  NormParams params;
  params.modalities = table.modalities();
  params.min.assign(n, std::numeric_limits<double>::infinity());
  params.max.assign(n, -std::numeric_limits<double>::infinity());
  params.fitted_on.assign(n, 0);
  for (std::size_t r : train_rows) {
    const auto& scores = table.row(r).scores;
    for (std::size_t m = 0; m < n; ++m) {
      if (!scores[m]) continue;
      params.min[m] = std::min(params.min[m], *scores[m]);
      params.max[m] = std::max(params.max[m], *scores[m]);
      ++params.fitted_on[m];
    }
  }
  for (std::size_t m = 0; m < n; ++m) {
    if (params.fitted_on[m] < 2 || !(params.max[m] > params.min[m])) {
      throw Error(ErrorKind::DegenerateModality,
                  "'" + params.modalities.name(m) + "' has " + std::to_string(params.fitted_on[m]) +
                      " present training score(s) without spread");
    }
  }
  return params;
}

ScoreTable transform(const ScoreTable& table, const NormParams& params) {
  if (params.modalities != table.modalities()) {
    throw Error(ErrorKind::ShapeMismatch, "normalization parameters fitted for other modalities");
  }
  ScoreTable out = table;
  for (std::size_t r = 0; r < out.size(); ++r) {
    for (std::size_t m = 0; m < out.modality_count(); ++m) {
      const Score& s = out.score(r, m);
      if (!s) continue;
      const double scaled = (*s - params.min[m]) / (params.max[m] - params.min[m]);
      out.set_score(r, m, std::clamp(scaled, 0.0, 1.0));
    }
  }
  out.set_normalized(true);
  return out;
}

json to_json(const NormParams& params) {
  json j = json::object();
  for (std::size_t m = 0; m < params.modalities.size(); ++m) {
    j[params.modalities.name(m)] = {{"min", params.min[m]}, {"max", params.max[m]}, {"fitted_on", params.fitted_on[m]}};
  }
  return json{{"modalities", params.modalities.names()}, {"params", j}};
}

NormParams norm_params_from_json(const json& j) {
  try {
    NormParams params;
    params.modalities = ModalitySet(j.at("modalities").get<std::vector<std::string>>());
    for (const auto& name : params.modalities.names()) {
      const json& p = j.at("params").at(name);
      params.min.push_back(p.at("min").get<double>());
      params.max.push_back(p.at("max").get<double>());
      params.fitted_on.push_back(p.value("fitted_on", std::size_t{0}));
      if (!(params.max.back() >= params.min.back())) {
        throw Error(ErrorKind::InvalidSpec, "'" + name + "': max < min");
      }
    }
    return params;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("normalization params: ") + e.what());
  }
}

}  // namespace mbfuse
