#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

namespace mbfuse {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Bayesian ridge regression with evidence maximization.

struct BayesianRidgeOptions {
  int max_updates = 300;
  double tolerance = 1e-3;
  /// When both are set the precisions are frozen and no evidence updates run.
  std::optional<double> fixed_lambda;
  std::optional<double> fixed_beta;
};

struct BayesianRidgeModel {
  Vector coef;
  double intercept = 0.0;
  double lambda = 1.0;  // weight-prior precision
  double beta = 1.0;    // noise precision
  int updates = 0;
  bool converged = false;
  /// Set when some direction of the regularized normal matrix was
  /// numerically zero and was dropped (pseudo-inverse).
  bool singular = false;

  double predict(std::span<const double> x) const;
};

/// Fits on centered data: coef = (lambda/beta * I + X'X)^-1 X'y, with lambda
/// and beta re-estimated by MacKay's fixed-point updates until the largest
/// coefficient change falls below the tolerance. Throws TooFewRows for < 2
/// rows.
BayesianRidgeModel fit_bayesian_ridge(const FeatureMatrix& x, const Vector& y, const BayesianRidgeOptions& options);

// ---------------------------------------------------------------------------
// CART regression tree.

struct CartOptions {
  int max_depth = 8;
  std::size_t min_leaf = 5;
};

struct CartNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean of the training targets reaching the node
  std::size_t count = 0;
};

class CartTree {
 public:
  CartTree() = default;
  explicit CartTree(std::vector<CartNode> nodes) : nodes_(std::move(nodes)) {}

  /// x[feature] <= threshold descends left.
  double predict(std::span<const double> x) const;
  int depth() const;
  const std::vector<CartNode>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<CartNode> nodes_;
};

/// Greedy splits minimizing the summed squared error of the two children.
/// Thresholds are midpoints between consecutive distinct feature values;
/// ties go to the lowest feature, then the lowest threshold. Throws
/// TooFewRows for fewer than 2 * min_leaf rows.
CartTree fit_cart(const FeatureMatrix& x, const Vector& y, const CartOptions& options);

// ---------------------------------------------------------------------------
// k nearest neighbours regression.

/// Exact Euclidean kNN. Training rows with identical feature vectors are
/// collapsed into one kd-tree point so duplicated placeholder values do not
/// degrade queries; neighbours are ordered by (squared distance, row index).
class KnnModel {
 public:
  KnnModel() = default;
  /// Throws TooFewRows when k is zero or exceeds the number of rows.
  KnnModel(FeatureMatrix x, Vector y, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  const FeatureMatrix& features() const noexcept { return x_; }
  const Vector& targets() const noexcept { return y_; }

  /// Training-row indices of the k nearest rows, nearest first.
  std::vector<std::size_t> neighbors(std::span<const double> query) const;
  /// Unweighted mean target of the k nearest rows.
  double predict(std::span<const double> query) const;

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    int dim = -1;                    // -1 for leaves
    double split = 0.0;
    int left = -1, right = -1;
  };
  struct Group {
    std::size_t row = 0;                       // representative row of x_
    std::size_t first = 0, count = 0;          // slice of members_
  };

  int build(std::size_t begin, std::size_t end);
  void search(int node, std::span<const double> query, std::vector<std::pair<double, std::size_t>>& heap) const;

  FeatureMatrix x_;
  Vector y_;
  std::size_t k_ = 0;
  std::vector<Group> groups_;
  std::vector<std::size_t> members_;
  std::vector<std::size_t> order_;  // group ids, permuted by the tree build
  std::vector<Node> nodes_;
};

KnnModel fit_knn(const FeatureMatrix& x, const Vector& y, std::size_t k);

nlohmann::json to_json(const BayesianRidgeModel& model);
BayesianRidgeModel bayesian_ridge_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CartTree& tree);
CartTree cart_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KnnModel& model);
KnnModel knn_from_json(const nlohmann::json& j);

}  // namespace mbfuse
