#include "mbfuse/error.hpp"
#include "mbfuse/regressors.hpp"

namespace mbfuse {

using nlohmann::json;

namespace {

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json to_json(const BayesianRidgeModel& model) {
  return {{"coef", vector_json(model.coef)}, {"intercept", model.intercept}, {"lambda", model.lambda},
          {"beta", model.beta},             {"updates", model.updates},     {"converged", model.converged},
          {"singular", model.singular}};
}

BayesianRidgeModel bayesian_ridge_from_json(const json& j) {
  return guarded("bayesian ridge model", [&] {
    BayesianRidgeModel m;
    m.coef = vector_from(j.at("coef"));
    m.intercept = j.at("intercept").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.beta = j.at("beta").get<double>();
    m.updates = j.value("updates", 0);
    m.converged = j.value("converged", false);
    m.singular = j.value("singular", false);
    return m;
  });
}

json to_json(const CartTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left},
                     {"right", n.right},     {"value", n.value},         {"count", n.count}});
  }
  return {{"nodes", nodes}};
}

CartTree cart_from_json(const json& j) {
  return guarded("cart tree", [&] {
    std::vector<CartNode> nodes;
    for (const auto& n : j.at("nodes")) {
      nodes.push_back(CartNode{n.at("feature").get<int>(), n.at("threshold").get<double>(), n.at("left").get<int>(),
                               n.at("right").get<int>(), n.at("value").get<double>(),
                               n.at("count").get<std::size_t>()});
    }
    const auto size = static_cast<int>(nodes.size());
    for (const auto& n : nodes) {
      if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
        throw Error(ErrorKind::InvalidSpec, "cart tree: child index out of range");
      }
    }
    if (nodes.empty()) throw Error(ErrorKind::InvalidSpec, "cart tree: no nodes");
    return CartTree(std::move(nodes));
  });
}

json to_json(const KnnModel& model) {
  const auto& x = model.features();
  json rows = json::array();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    rows.push_back(std::vector<double>(x.row(r).data(), x.row(r).data() + x.cols()));
  }
  return {{"k", model.k()}, {"features", rows}, {"targets", vector_json(model.targets())}};
}

KnnModel knn_from_json(const json& j) {
  return guarded("knn model", [&] {
    const auto rows = j.at("features").get<std::vector<std::vector<double>>>();
    const Vector y = vector_from(j.at("targets"));
    const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != cols) {
        throw Error(ErrorKind::InvalidSpec, "knn model: ragged feature rows");
      }
      for (Eigen::Index c = 0; c < cols; ++c) x(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
    return KnnModel(std::move(x), y, j.at("k").get<std::size_t>());
  });
}

}  // namespace mbfuse
