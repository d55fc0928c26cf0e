#include <algorithm>
#include <numeric>

#include "mbfuse/error.hpp"
#include "mbfuse/regressors.hpp"

namespace mbfuse {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double cost = 0.0;
  std::size_t left_count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const Vector& y, const CartOptions& options)
      : x_(x), y_(y), options_(options) {}

  std::vector<CartNode> build() {
    std::vector<std::size_t> rows(static_cast<std::size_t>(x_.rows()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    // Shifted by the first target so a pure node gets its exact value.
    const double y0 = y_[static_cast<Eigen::Index>(rows.front())];
    double shift = 0.0;
    bool pure = true;
    for (std::size_t r : rows) {
      const double y = y_[static_cast<Eigen::Index>(r)];
      shift += y - y0;
      pure = pure && y == y0;
    }
    const double mean = y0 + shift / static_cast<double>(rows.size());
    double sse = 0.0;
    for (std::size_t r : rows) {
      const double d = y_[static_cast<Eigen::Index>(r)] - mean;
      sse += d * d;
    }
    nodes_[id].value = mean;
    nodes_[id].count = rows.size();

    if (depth >= options_.max_depth || rows.size() < 2 * options_.min_leaf || pure) return id;
    const Split best = find_split(rows, mean, sse);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    left.reserve(best.left_count);
    right.reserve(rows.size() - best.left_count);
    for (std::size_t r : rows) {
      (x_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Scans every feature in index order and every threshold in ascending
  // order; only a strictly lower cost replaces the incumbent.
  Split find_split(const std::vector<std::size_t>& rows, double mean, double parent_sse) const {
    const std::size_t n = rows.size();
    Split best;
    best.cost = parent_sse;
    std::vector<std::size_t> order(rows);
    std::vector<double> prefix(n + 1), prefix_sq(n + 1);
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = x_(static_cast<Eigen::Index>(a), f), xb = x_(static_cast<Eigen::Index>(b), f);
        return xa < xb || (xa == xb && a < b);
      });
      // Sums of targets centred on the node mean limit cancellation.
      for (std::size_t i = 0; i < n; ++i) {
        const double d = y_[static_cast<Eigen::Index>(order[i])] - mean;
        prefix[i + 1] = prefix[i] + d;
        prefix_sq[i + 1] = prefix_sq[i] + d * d;
      }
      for (std::size_t i = options_.min_leaf; i + options_.min_leaf <= n; ++i) {
        const double lo = x_(static_cast<Eigen::Index>(order[i - 1]), f);
        const double hi = x_(static_cast<Eigen::Index>(order[i]), f);
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(i), nr = static_cast<double>(n - i);
        const double sl = prefix[i], sr = prefix[n] - prefix[i];
        const double cost = (prefix_sq[i] - sl * sl / nl) + (prefix_sq[n] - prefix_sq[i] - sr * sr / nr);
        if (cost < best.cost) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = Split{static_cast<int>(f), threshold, cost, i};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  const Vector& y_;
  const CartOptions& options_;
  std::vector<CartNode> nodes_;
};

int depth_of(const std::vector<CartNode>& nodes, int id) {
  const CartNode& node = nodes[static_cast<std::size_t>(id)];
  if (node.feature < 0) return 0;
  return 1 + std::max(depth_of(nodes, node.left), depth_of(nodes, node.right));
}

}  // namespace

double CartTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) throw Error(ErrorKind::RegressorFitFailure, "empty tree");
  std::size_t id = 0;
  while (nodes_[id].feature >= 0) {
    const CartNode& node = nodes_[id];
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return nodes_[id].value;
}

int CartTree::depth() const { return nodes_.empty() ? 0 : depth_of(nodes_, 0); }

CartTree fit_cart(const FeatureMatrix& x, const Vector& y, const CartOptions& options) {
  if (options.min_leaf == 0 || options.max_depth < 0) {
    throw Error(ErrorKind::InvalidSpec, "cart needs min_leaf >= 1 and max_depth >= 0");
  }
  if (y.size() != x.rows()) throw Error(ErrorKind::ShapeMismatch, "target length differs from row count");
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0 || n < 2 * options.min_leaf) {
    throw Error(ErrorKind::TooFewRows, "cart needs >= " + std::to_string(2 * options.min_leaf) + " rows, got " +
                                           std::to_string(n));
  }
  return CartTree(TreeBuilder(x, y, options).build());
}

}  // namespace mbfuse
