// Copyright 2026 The RecZilla Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent from-definition reference implementations used by the unit
// and acceptance tests. They favor direct loops over efficiency and share no
// code with the library.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Ranking metrics

struct Context {
  std::vector<std::vector<int>> lists;
  std::vector<std::vector<int>> relevant;
  std::vector<double> popularity;
  int num_items = 0;
};

inline bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

inline std::vector<int> head(const std::vector<int>& list, int k) {
  return {list.begin(), list.begin() + std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(list.size()))};
}

// Value of one base metric (by upper-case name) at cutoff k.
inline double metric(const Context& c, const std::string& name, int k) {
  const std::size_t n = c.lists.size();
  auto per_user_mean = [&](auto f) {
    if (n == 0) return 0.0;
    double s = 0;
    for (std::size_t u = 0; u < n; ++u) s += f(head(c.lists[u], k), c.relevant[u]);
    return s / static_cast<double>(n);
  };
  auto hits_of = [](const std::vector<int>& l, const std::vector<int>& rel) {
    double h = 0;
    for (int i : l) h += contains(rel, i) ? 1 : 0;
    return h;
  };
  if (name == "PRECISION") return per_user_mean([&](auto l, auto rel) { return hits_of(l, rel) / k; });
  if (name == "PRECISION_RECALL_MIN_DEN") {
    return per_user_mean([&](auto l, auto rel) {
      return hits_of(l, rel) / std::min<double>(k, static_cast<double>(rel.size()));
    });
  }
  if (name == "RECALL") {
    return per_user_mean([&](auto l, auto rel) { return hits_of(l, rel) / static_cast<double>(rel.size()); });
  }
  auto ap_sum = [&](const std::vector<int>& l, const std::vector<int>& rel) {
    // Precision at every relevant position.
    double s = 0;
    for (std::size_t r = 0; r < l.size(); ++r) {
      if (!contains(rel, l[r])) continue;
      std::vector<int> prefix(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(r + 1));
      s += hits_of(prefix, rel) / static_cast<double>(r + 1);
    }
    return s;
  };
  if (name == "MAP") return per_user_mean([&](auto l, auto rel) { return ap_sum(l, rel) / k; });
  if (name == "MAP_MIN_DEN") {
    return per_user_mean([&](auto l, auto rel) {
      return ap_sum(l, rel) / std::min<double>(k, static_cast<double>(rel.size()));
    });
  }
  if (name == "MRR") {
    return per_user_mean([&](auto l, auto rel) {
      for (std::size_t r = 0; r < l.size(); ++r) {
        if (contains(rel, l[r])) return 1.0 / static_cast<double>(r + 1);
      }
      return 0.0;
    });
  }
  if (name == "ARHR") {
    return per_user_mean([&](auto l, auto rel) {
      double s = 0;
      for (std::size_t r = 0; r < l.size(); ++r) s += contains(rel, l[r]) ? 1.0 / static_cast<double>(r + 1) : 0;
      return s;
    });
  }
  if (name == "NDCG") {
    return per_user_mean([&](auto l, auto rel) {
      std::vector<double> gains;
      for (int i : l) gains.push_back(contains(rel, i) ? 1.0 : 0.0);
      double dcg = 0;
      for (std::size_t r = 0; r < gains.size(); ++r) dcg += gains[r] / std::log2(static_cast<double>(r) + 2.0);
      // Ideal ordering: all relevant first, within the K slots.
      std::vector<double> ideal(static_cast<std::size_t>(k), 0.0);
      for (std::size_t r = 0; r < ideal.size() && r < rel.size(); ++r) ideal[r] = 1.0;
      double idcg = 0;
      for (std::size_t r = 0; r < ideal.size(); ++r) idcg += ideal[r] / std::log2(static_cast<double>(r) + 2.0);
      return idcg > 0 ? dcg / idcg : 0.0;
    });
  }
  if (name == "HIT_RATE") return per_user_mean([&](auto l, auto rel) { return hits_of(l, rel) > 0 ? 1.0 : 0.0; });
  if (name == "F1") {
    const double p = metric(c, "PRECISION", k), r = metric(c, "RECALL", k);
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  if (name == "NOVELTY") {
    const double total = std::accumulate(c.popularity.begin(), c.popularity.end(), 0.0);
    return per_user_mean([&](auto l, auto) {
      double s = 0;
      for (int i : l) {
        const double p = std::max(c.popularity[static_cast<std::size_t>(i)], 1.0) / std::max(total, 1.0);
        s -= std::log(p);
      }
      return s / c.num_items;
    });
  }
  if (name == "AVERAGE_POPULARITY") {
    const double mx = *std::max_element(c.popularity.begin(), c.popularity.end());
    return per_user_mean([&](auto l, auto) {
      if (l.empty() || mx <= 0) return 0.0;
      double s = 0;
      for (int i : l) s += c.popularity[static_cast<std::size_t>(i)] / mx;
      return s / static_cast<double>(l.size());
    });
  }
  // Pooled distribution of recommended items.
  std::vector<double> counts(static_cast<std::size_t>(c.num_items), 0.0);
  for (const auto& l : c.lists) {
    for (int i : head(l, k)) counts[static_cast<std::size_t>(i)] += 1;
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (name == "DIVERSITY_GINI" || name == "DIVERSITY_HERFINDAHL" || name == "SHANNON_ENTROPY") {
    if (total <= 0) return 0.0;
    std::vector<double> p;
    for (double x : counts) p.push_back(x / total);
    if (name == "DIVERSITY_HERFINDAHL") {
      double s = 0;
      for (double x : p) s += x * x;
      return 1 - s;
    }
    if (name == "SHANNON_ENTROPY") {
      double s = 0;
      for (double x : p) s += x > 0 ? -x * std::log2(x) : 0;
      return s;
    }
    double s = 0;
    for (double a : p) {
      for (double b : p) s += std::abs(a - b);
    }
    return s / (2.0 * c.num_items);
  }
  if (name == "DIVERSITY_MEAN_INTER_LIST" || name == "DIVERSITY_SIMILARITY") {
    if (n < 2) return 0.0;
    double s = 0, pairs = 0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        double shared = 0;
        for (int i : head(c.lists[a], k)) shared += contains(head(c.lists[b], k), i) ? 1 : 0;
        s += 1.0 - shared / k;
        pairs += 1;
      }
    }
    return s / pairs;
  }
  if (name == "ITEM_COVERAGE") {
    double covered = 0;
    for (double x : counts) covered += x > 0 ? 1 : 0;
    return covered / c.num_items;
  }
  if (name == "ITEM_HIT_COVERAGE") {
    std::set<int> all, hit;
    for (std::size_t u = 0; u < n; ++u) {
      all.insert(c.relevant[u].begin(), c.relevant[u].end());
      for (int i : head(c.lists[u], k)) {
        if (contains(c.relevant[u], i)) hit.insert(i);
      }
    }
    return all.empty() ? 0.0 : static_cast<double>(hit.size()) / static_cast<double>(all.size());
  }
  if (name == "USER_COVERAGE") return per_user_mean([&](auto l, auto) { return l.empty() ? 0.0 : 1.0; });
  if (name == "USER_HIT_COVERAGE") return metric(c, "HIT_RATE", k) * metric(c, "USER_COVERAGE", k);
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Descriptive statistics

inline std::vector<double> describe(std::vector<double> v) {
  const double n = static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  double mean = 0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  double m3 = 0, m4 = 0;
  for (double x : v) {
    m3 += std::pow(x - mean, 3);
    m4 += std::pow(x - mean, 4);
  }
  m3 /= n;
  m4 /= n;
  const std::size_t s = v.size();
  const double median = s % 2 ? v[s / 2] : (v[s / 2 - 1] + v[s / 2]) / 2;
  // Most frequent value, smallest on ties.
  std::map<double, int> freq;
  for (double x : v) ++freq[x];
  double mode = v[0];
  int best = 0;
  for (const auto& [x, f] : freq) {
    if (f > best) {
      best = f;
      mode = x;
    }
  }
  // Mean absolute difference over all ordered pairs, over twice the mean.
  double gini = 0;
  if (mean != 0) {
    double d = 0;
    for (double a : v) {
      for (double b : v) d += std::abs(a - b);
    }
    gini = d / (2 * n * n * mean);
  }
  double total = 0;
  for (double x : v) total += x > 0 ? x : 0;
  double entropy = 0;
  for (double x : v) {
    if (x > 0) entropy -= x / total * std::log(x / total);
  }
  const double skew = var > 0 ? m3 / std::pow(var, 1.5) : 0;
  const double kurt = var > 0 ? m4 / (var * var) - 3 : 0;
  return {mean, v.back(), v.front(), std::sqrt(var), median, mode, gini, skew, kurt, entropy};
}

// ---------------------------------------------------------------------------
// Correlation, coverage and selection

inline double weighted_correlation(const std::vector<double>& x, const std::vector<double>& y,
                                   const std::vector<double>& w) {
  double sw = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    mx += w[i] * x[i];
    my += w[i] * y[i];
  }
  mx /= sw;
  my /= sw;
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxy += w[i] * (x[i] - mx) * (y[i] - my);
    cxx += w[i] * (x[i] - mx) * (x[i] - mx);
    cyy += w[i] * (y[i] - my) * (y[i] - my);
  }
  if (cxx <= 0 || cyy <= 0) return 0.0;
  return cxy / std::sqrt(cxx * cyy);
}

inline double coverage(const Eigen::MatrixXd& normalized, const std::vector<int>& subset) {
  double total = 0;
  for (Eigen::Index d = 0; d < normalized.rows(); ++d) {
    double best = 0;
    for (int a : subset) {
      const double v = normalized(d, a);
      if (!std::isnan(v)) best = std::max(best, v);
    }
    total += best;
  }
  return total / static_cast<double>(normalized.rows());
}

// Best coverage over all subsets of exactly min(n, columns) members.
inline double exhaustive_coverage(const Eigen::MatrixXd& normalized, int n) {
  const int cols = static_cast<int>(normalized.cols());
  const int size = std::min(n, cols);
  double best = 0;
  for (std::uint32_t mask = 0; mask < (1u << cols); ++mask) {
    if (std::popcount(mask) != size) continue;
    std::vector<int> subset;
    for (int a = 0; a < cols; ++a) {
      if (mask & (1u << a)) subset.push_back(a);
    }
    best = std::max(best, coverage(normalized, subset));
  }
  return best;
}

// Meta-feature selection pseudocode: x_i starts at 0; every round takes the
// feature with the largest max_i (c_ij - x_i) among unselected ones (first on
// ties) and raises x_i to c_ij'.
inline std::vector<int> simulate_feature_selection(const std::vector<std::vector<double>>& c, int m) {
  const std::size_t algorithms = c.size();
  const std::size_t features = c.empty() ? 0 : c[0].size();
  std::vector<double> x(algorithms, 0.0);
  std::vector<int> chosen;
  std::vector<bool> taken(features, false);
  for (int round = 0; round < m && chosen.size() < features; ++round) {
    std::vector<double> improvement(features, -1e300);
    for (std::size_t j = 0; j < features; ++j) {
      if (taken[j]) continue;
      for (std::size_t i = 0; i < algorithms; ++i) improvement[j] = std::max(improvement[j], c[i][j] - x[i]);
    }
    std::size_t pick = 0;
    while (taken[pick]) ++pick;
    for (std::size_t j = 0; j < features; ++j) {
      if (!taken[j] && improvement[j] > improvement[pick]) pick = j;
    }
    taken[pick] = true;
    chosen.push_back(static_cast<int>(pick));
    for (std::size_t i = 0; i < algorithms; ++i) x[i] = std::max(x[i], c[i][pick]);
  }
  return chosen;
}

// Indices not strictly dominated (at least as good in both, better in one).
inline std::vector<int> pareto(const std::vector<double>& perf, const std::vector<double>& time) {
  std::vector<int> out;
  for (std::size_t a = 0; a < perf.size(); ++a) {
    bool dominated = false;
    for (std::size_t b = 0; b < perf.size(); ++b) {
      if (perf[b] >= perf[a] && time[b] <= time[a] && (perf[b] > perf[a] || time[b] < time[a])) dominated = true;
    }
    if (!dominated) out.push_back(static_cast<int>(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Algorithm kernels on dense matrices

// Pairwise similarity of the rows of `x` for the kinds with a closed form
// on a pair of vectors.
inline double pair_similarity(const std::string& kind, Eigen::VectorXd a, Eigen::VectorXd b, double shrink,
                              double alpha, double beta) {
  if (kind == "dice" || kind == "jaccard" || kind == "tversky") {
    a = (a.array() != 0).cast<double>();
    b = (b.array() != 0).cast<double>();
    double both = 0, only_a = 0, only_b = 0;
    for (Eigen::Index t = 0; t < a.size(); ++t) {
      both += a[t] * b[t];
      only_a += a[t] * (1 - b[t]);
      only_b += b[t] * (1 - a[t]);
    }
    double den = 0;
    if (kind == "dice") {
      den = 2 * both + only_a + only_b + shrink;
      return den > 0 ? 2 * both / den : 0;
    }
    if (kind == "jaccard") {
      den = both + only_a + only_b + shrink;
      return den > 0 ? both / den : 0;
    }
    den = both + alpha * only_a + beta * only_b + shrink;
    return den > 0 ? both / den : 0;
  }
  const double dot = a.dot(b);
  if (kind == "cosine") {
    const double den = a.norm() * b.norm() + shrink;
    return den > 0 ? dot / den : 0;
  }
  if (kind == "cosine-raw") return dot / (1 + shrink);
  if (kind == "asymmetric") {
    const double na = a.squaredNorm(), nb = b.squaredNorm();
    if (na == 0 || nb == 0) return 0;
    return dot / (std::pow(na, alpha) * std::pow(nb, 1 - alpha) + shrink);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double euclidean_similarity(Eigen::VectorXd a, Eigen::VectorXd b, double shrink, bool normalize,
                                   bool avg_row, const std::string& conversion) {
  if (normalize) {
    if (a.norm() > 0) a /= a.norm();
    if (b.norm() > 0) b /= b.norm();
  }
  double dist = (a - b).norm();
  if (avg_row) dist /= static_cast<double>(a.size());
  if (conversion == "lin") return 1 / (dist + shrink + 1e-6);
  if (conversion == "log") return 1 / (std::log(dist + 1) + shrink + 1e-6);
  return std::exp(-dist) / (1 + shrink);
}

// Item-item two-step random walk: row j of the result is sum over users u of
// P(j -> u) P(u -> i), with both transition matrices raised to alpha.
inline Eigen::MatrixXd random_walk(const Eigen::MatrixXd& r, double alpha, double beta, bool rp3) {
  const Eigen::Index users = r.rows(), items = r.cols();
  Eigen::MatrixXd p_ui = Eigen::MatrixXd::Zero(users, items);
  for (Eigen::Index u = 0; u < users; ++u) {
    const double s = r.row(u).cwiseAbs().sum();
    for (Eigen::Index i = 0; i < items; ++i) {
      if (r(u, i) != 0) p_ui(u, i) = std::pow(r(u, i) / s, alpha);
    }
  }
  Eigen::MatrixXd p_iu = Eigen::MatrixXd::Zero(items, users);
  for (Eigen::Index i = 0; i < items; ++i) {
    double deg = 0;
    for (Eigen::Index u = 0; u < users; ++u) deg += r(u, i) != 0 ? 1 : 0;
    for (Eigen::Index u = 0; u < users; ++u) {
      if (r(u, i) != 0) p_iu(i, u) = std::pow(1.0 / deg, alpha);
    }
  }
  Eigen::MatrixXd w = p_iu * p_ui;
  if (rp3) {
    for (Eigen::Index i = 0; i < items; ++i) {
      double pop = 0;
      for (Eigen::Index u = 0; u < users; ++u) pop += r(u, i) != 0 ? 1 : 0;
      if (pop > 0) w.col(i) /= std::pow(pop, beta);
    }
  }
  w.diagonal().setZero();
  return w;
}

inline Eigen::MatrixXd ease(const Eigen::MatrixXd& x, double l2) {
  const Eigen::Index n = x.cols();
  Eigen::MatrixXd g = x.transpose() * x + l2 * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd p = g.fullPivLu().inverse();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = i == j ? 0.0 : -p(i, j) / p(j, j);
  }
  return b;
}

// Weighted squared error on the full dense matrix.
inline double ials_objective(const Eigen::MatrixXd& r, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                             double alpha, double reg) {
  double total = 0;
  for (Eigen::Index u = 0; u < r.rows(); ++u) {
    for (Eigen::Index i = 0; i < r.cols(); ++i) {
      const double pred = x.row(u).dot(y.row(i));
      const double pref = r(u, i) != 0 ? 1.0 : 0.0;
      const double conf = 1 + alpha * r(u, i);
      total += conf * (pref - pred) * (pref - pred);
    }
  }
  return total + reg * (x.squaredNorm() + y.squaredNorm());
}

inline double bpr_loss(const Eigen::MatrixXd& users, const Eigen::MatrixXd& items, int u, int i, int j,
                       double pos_reg, double neg_reg) {
  const double x = users.row(u).dot(items.row(i)) - users.row(u).dot(items.row(j));
  const double sigmoid = 1 / (1 + std::exp(-x));
  return -std::log(sigmoid) +
         0.5 * pos_reg * (users.row(u).squaredNorm() + items.row(i).squaredNorm()) +
         0.5 * neg_reg * items.row(j).squaredNorm();
}

// ---------------------------------------------------------------------------
// Misc

inline int competition_rank(const std::vector<double>& values, std::size_t index) {
  // Position in a descending sort where ties share the first slot.
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return static_cast<int>(std::find(sorted.begin(), sorted.end(), values[index]) - sorted.begin()) + 1;
}

}  // namespace oracle
