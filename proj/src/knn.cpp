#include <algorithm>
#include <numeric>

#include "mbfuse/error.hpp"
#include "mbfuse/regressors.hpp"

namespace mbfuse {

namespace {

constexpr std::size_t kLeafSize = 8;

using Candidate = std::pair<double, std::size_t>;  // (squared distance, row)

}  // namespace

KnnModel::KnnModel(FeatureMatrix x, Vector y, std::size_t k) : x_(std::move(x)), y_(std::move(y)), k_(k) {
  const auto n = static_cast<std::size_t>(x_.rows());
  if (y_.size() != x_.rows()) throw Error(ErrorKind::ShapeMismatch, "target length differs from row count");
  if (k_ == 0 || k_ > n) {
    throw Error(ErrorKind::TooFewRows, "knn with k = " + std::to_string(k_) + " needs at least k rows, got " +
                                           std::to_string(n));
  }

  // Group identical feature vectors; members stay in ascending row order so
  // only the first k of a group can ever be selected.
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto d = x_.cols();
  auto row_less = [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double xa = x_(static_cast<Eigen::Index>(a), c), xb = x_(static_cast<Eigen::Index>(b), c);
      if (xa != xb) return xa < xb;
    }
    return a < b;
  };
  auto same_point = [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (x_(static_cast<Eigen::Index>(a), c) != x_(static_cast<Eigen::Index>(b), c)) return false;
    }
    return true;
  };
  std::sort(rows.begin(), rows.end(), row_less);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && same_point(rows[i], rows[j])) ++j;
    Group g{rows[i], members_.size(), std::min(j - i, k_)};
    for (std::size_t t = i; t < i + g.count; ++t) members_.push_back(rows[t]);
    groups_.push_back(g);
    i = j;
  }

  order_.resize(groups_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  build(0, order_.size());
}

int KnnModel::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, 0.0, -1, -1});
  if (end - begin <= kLeafSize || x_.cols() == 0) return id;

  int best_dim = -1;
  double best_spread = 0.0;
  for (Eigen::Index c = 0; c < x_.cols(); ++c) {
    double lo = x_(static_cast<Eigen::Index>(groups_[order_[begin]].row), c), hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = x_(static_cast<Eigen::Index>(groups_[order_[i]].row), c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = static_cast<int>(c);
    }
  }
  if (best_dim < 0) return id;

  const std::size_t mid = begin + (end - begin) / 2;
  auto coord = [&](std::size_t g) { return x_(static_cast<Eigen::Index>(groups_[g].row), best_dim); };
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return coord(a) < coord(b); });
  const double split = coord(order_[mid]);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].dim = best_dim;
  nodes_[static_cast<std::size_t>(id)].split = split;
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KnnModel::search(int node_id, std::span<const double> query, std::vector<Candidate>& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.dim < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const Group& g = groups_[order_[i]];
      double d2 = 0.0;
      for (Eigen::Index c = 0; c < x_.cols(); ++c) {
        const double diff = query[static_cast<std::size_t>(c)] - x_(static_cast<Eigen::Index>(g.row), c);
        d2 += diff * diff;
      }
      for (std::size_t m = g.first; m < g.first + g.count; ++m) {
        Candidate cand{d2, members_[m]};
        if (heap.size() < k_) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        } else {
          break;  // later members have larger row indices at the same distance
        }
      }
    }
    return;
  }
  const double delta = query[static_cast<std::size_t>(node.dim)] - node.split;
  const int near = delta < 0.0 ? node.left : node.right;
  const int far = delta < 0.0 ? node.right : node.left;
  search(near, query, heap);
  // Equal bounds are still explored: a tie may hold a lower row index.
  if (heap.size() < k_ || delta * delta <= heap.front().first) search(far, query, heap);
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> query) const {
  if (query.size() != static_cast<std::size_t>(x_.cols())) {
    throw Error(ErrorKind::ShapeMismatch, "query has " + std::to_string(query.size()) + " features, model " +
                                              std::to_string(x_.cols()));
  }
  std::vector<Candidate> heap;
  heap.reserve(k_ + 1);
  search(0, query, heap);
  std::sort_heap(heap.begin(), heap.end());
  std::vector<std::size_t> out;
  out.reserve(heap.size());
  for (const auto& c : heap) out.push_back(c.second);
  return out;
}

double KnnModel::predict(std::span<const double> query) const {
  double sum = 0.0;
  for (std::size_t r : neighbors(query)) sum += y_[static_cast<Eigen::Index>(r)];
  return sum / static_cast<double>(k_);
}

KnnModel fit_knn(const FeatureMatrix& x, const Vector& y, std::size_t k) { return KnnModel(x, y, k); }

}  // namespace mbfuse
