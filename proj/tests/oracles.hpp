// Brute-force reference implementations. Deliberately naive and written
// without reference to the library internals.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// P(genuine > impostor) + 0.5 P(tie), counted over every pair.
inline double auc_pairs(const std::vector<double>& genuine, const std::vector<double>& impostor) {
  double wins = 0.0;
  for (double g : genuine) {
    for (double i : impostor) {
      if (g > i) wins += 1.0;
      else if (g == i) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(genuine.size()) * static_cast<double>(impostor.size()));
}

struct Comparison {
  std::string probe;
  bool genuine = false;
  double score = 0.0;
};

// accuracy[k-1]: fraction of probes whose genuine score is beaten or tied by
// fewer than k impostors of the same probe.
inline std::vector<double> cmc(const std::vector<Comparison>& rows, std::size_t max_rank) {
  std::map<std::string, std::vector<const Comparison*>> by_probe;
  for (const auto& r : rows) by_probe[r.probe].push_back(&r);
  std::vector<double> acc(max_rank, 0.0);
  for (const auto& [probe, list] : by_probe) {
    double mate = 0.0;
    for (const auto* r : list) {
      if (r->genuine) mate = r->score;
    }
    std::size_t rank = 1;
    for (const auto* r : list) {
      if (!r->genuine && r->score >= mate) ++rank;
    }
    for (std::size_t k = rank; k <= max_rank; ++k) acc[k - 1] += 1.0;
  }
  for (double& a : acc) a /= static_cast<double>(by_probe.size());
  return acc;
}

// Indices of the k nearest rows by full sort on (squared distance, index).
inline std::vector<std::size_t> knn_sort(const std::vector<std::vector<double>>& x, const std::vector<double>& q,
                                         std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += (x[i][j] - q[j]) * (x[i][j] - q[j]);
    d.emplace_back(s, i);
  }
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
  return out;
}

// Gaussian elimination with partial pivoting on a dense copy.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// Ridge posterior mean with precisions (lambda, beta) on centred data:
// (lambda I + beta X'X) w = beta X'y. Returns {w..., intercept}.
inline std::vector<double> ridge(const std::vector<std::vector<double>>& x, const std::vector<double>& y, double lambda,
                                 double beta) {
  const std::size_t n = x.size(), p = x[0].size();
  std::vector<double> xm(p, 0.0);
  double ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ym += y[i];
    for (std::size_t j = 0; j < p; ++j) xm[j] += x[i][j];
  }
  ym /= static_cast<double>(n);
  for (double& v : xm) v /= static_cast<double>(n);
  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      b[j] += beta * (x[i][j] - xm[j]) * (y[i] - ym);
      for (std::size_t k = 0; k < p; ++k) a[j][k] += beta * (x[i][j] - xm[j]) * (x[i][k] - xm[k]);
    }
  }
  for (std::size_t j = 0; j < p; ++j) a[j][j] += lambda;
  std::vector<double> w = solve(a, b);
  double intercept = ym;
  for (std::size_t j = 0; j < p; ++j) intercept -= w[j] * xm[j];
  w.push_back(intercept);
  return w;
}

struct Split {
  double threshold = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

// Best 1-D split by trying every midpoint, recomputing both children's
// squared error from scratch. Each side needs at least min_leaf rows.
inline Split best_split_1d(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_leaf) {
  std::vector<double> values = x;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  auto sse = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double e : v) s += (e - m) * (e - m);
    return s;
  };
  Split best;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double t = (values[i] + values[i + 1]) / 2.0;
    std::vector<double> l, r;
    for (std::size_t j = 0; j < x.size(); ++j) (x[j] <= t ? l : r).push_back(y[j]);
    if (l.size() < min_leaf || r.size() < min_leaf) continue;
    const double c = sse(l) + sse(r);
    if (c < best.cost) best = {t, c};
  }
  return best;
}

}  // namespace oracle
