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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"

namespace reczilla {

namespace {

constexpr double kDistanceEps = 1e-6;

// Builds a CSR matrix from per-row (column, value) lists already sorted by
// value; columns are re-sorted here.
CsrMatrix from_rows(int rows, int cols, std::vector<std::vector<std::pair<int, double>>> entries) {
  std::vector<int> indptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<int> indices;
  std::vector<double> values;
  for (int r = 0; r < rows; ++r) {
    auto& row = entries[static_cast<std::size_t>(r)];
    std::sort(row.begin(), row.end());
    for (const auto& [c, v] : row) {
      indices.push_back(c);
      values.push_back(v);
    }
    indptr[static_cast<std::size_t>(r) + 1] = static_cast<int>(indices.size());
  }
  return CsrMatrix::from_arrays(rows, cols, std::move(indptr), std::move(indices), std::move(values));
}

CsrMatrix map_values(const CsrMatrix& m, const std::function<double(int, int, double)>& f) {
  std::vector<double> values(m.values().size());
  for (int r = 0; r < m.rows(); ++r) {
    const int begin = m.row_begin(r);
    auto idx = m.row_indices(r);
    auto val = m.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      values[static_cast<std::size_t>(begin) + k] = f(r, idx[k], val[k]);
    }
  }
  return CsrMatrix::from_arrays(m.rows(), m.cols(), m.indptr(), m.indices(), std::move(values));
}

CsrMatrix l1_normalize_rows(const CsrMatrix& m) {
  std::vector<double> sums(static_cast<std::size_t>(m.rows()), 0.0);
  for (int r = 0; r < m.rows(); ++r) {
    for (double v : m.row_values(r)) sums[static_cast<std::size_t>(r)] += std::abs(v);
  }
  return map_values(m, [&](int r, int, double v) {
    const double s = sums[static_cast<std::size_t>(r)];
    return s > 0 ? v / s : v;
  });
}

double squared_distance(const CsrMatrix& m, int a, int b) {
  auto ia = m.row_indices(a), ib = m.row_indices(b);
  auto va = m.row_values(a), vb = m.row_values(b);
  double total = 0.0;
  std::size_t p = 0, q = 0;
  while (p < ia.size() || q < ib.size()) {
    double diff;
    if (q == ib.size() || (p < ia.size() && ia[p] < ib[q])) {
      diff = va[p++];
    } else if (p == ia.size() || ib[q] < ia[p]) {
      diff = vb[q++];
    } else {
      diff = va[p++] - vb[q++];
    }
    total += diff * diff;
  }
  return total;
}

}  // namespace

SimilarityKind parse_similarity_kind(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "cosine") return SimilarityKind::cosine;
  if (n == "asymmetric" || n == "asymmetric-cosine") return SimilarityKind::asymmetric;
  if (n == "dice") return SimilarityKind::dice;
  if (n == "jaccard") return SimilarityKind::jaccard;
  if (n == "tversky") return SimilarityKind::tversky;
  if (n == "euclidean") return SimilarityKind::euclidean;
  fail(ErrorCode::invalid_argument, "unknown similarity kind '" + std::string(name) + "'");
}

CsrMatrix apply_feature_weighting(const CsrMatrix& entity_by_feature, const std::string& scheme) {
  if (scheme == "none") return entity_by_feature;
  const double n = static_cast<double>(entity_by_feature.rows());
  std::vector<int> df = entity_by_feature.col_counts();
  std::vector<double> idf(df.size());
  for (std::size_t f = 0; f < df.size(); ++f) idf[f] = std::log(n / (1.0 + df[f]));
  if (scheme == "TF-IDF") {
    return map_values(entity_by_feature, [&](int, int f, double v) {
      return std::sqrt(std::max(v, 0.0)) * idf[static_cast<std::size_t>(f)];
    });
  }
  if (scheme == "BM25") {
    constexpr double k1 = 1.2;
    constexpr double b = 0.75;
    std::vector<double> length = entity_by_feature.row_sums();
    const double avg = length.empty() ? 0.0 : std::accumulate(length.begin(), length.end(), 0.0) / n;
    return map_values(entity_by_feature, [&](int r, int f, double v) {
      const double norm = (1.0 - b) + (avg > 0 ? b * length[static_cast<std::size_t>(r)] / avg : b);
      return v * (k1 + 1.0) / (k1 * norm + v) * idf[static_cast<std::size_t>(f)];
    });
  }
  fail(ErrorCode::invalid_argument, "unknown feature weighting '" + scheme + "'");
}

CsrMatrix build_similarity(const CsrMatrix& ratings, Axis axis, SimilarityKind kind,
                           const SimilarityParams& params, const Deadline& deadline) {
  if (params.top_k < 1) fail(ErrorCode::invalid_argument, "top-K must be positive");
  if (params.shrink < 0) fail(ErrorCode::invalid_argument, "shrink must be nonnegative");
  if (kind == SimilarityKind::euclidean && params.from_distance != "lin" && params.from_distance != "log" &&
      params.from_distance != "exp") {
    fail(ErrorCode::invalid_argument, "unknown similarity-from-distance '" + params.from_distance + "'");
  }
  CsrMatrix entities = axis == Axis::item ? ratings.transpose() : ratings;
  if (kind == SimilarityKind::cosine) {
    entities = apply_feature_weighting(entities, params.feature_weighting);
  }
  const bool binary = kind == SimilarityKind::dice || kind == SimilarityKind::jaccard ||
                      kind == SimilarityKind::tversky;
  if (binary) entities = entities.binarized();

  const int n = entities.rows();
  std::vector<double> sq(static_cast<std::size_t>(n), 0.0);
  for (int e = 0; e < n; ++e) {
    for (double v : entities.row_values(e)) sq[static_cast<std::size_t>(e)] += v * v;
  }
  if (kind == SimilarityKind::euclidean && params.normalize) {
    const std::vector<double> norms = sq;
    entities = map_values(entities, [&](int r, int, double v) {
      const double s = std::sqrt(norms[static_cast<std::size_t>(r)]);
      return s > 0 ? v / s : v;
    });
    for (int e = 0; e < n; ++e) {
      sq[static_cast<std::size_t>(e)] = 0.0;
      for (double v : entities.row_values(e)) sq[static_cast<std::size_t>(e)] += v * v;
    }
  }
  const CsrMatrix features = entities.transpose();
  const double num_features = static_cast<double>(entities.cols());

  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
  std::vector<double> dot(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sim(static_cast<std::size_t>(n), 0.0);
  std::vector<int> touched;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int e = 0; e < n; ++e) {
    if ((e & 63) == 0) deadline.check("similarity", e > 0);
    touched.clear();
    auto fidx = entities.row_indices(e);
    auto fval = entities.row_values(e);
    for (std::size_t k = 0; k < fidx.size(); ++k) {
      auto others = features.row_indices(fidx[k]);
      auto ovals = features.row_values(fidx[k]);
      for (std::size_t t = 0; t < others.size(); ++t) {
        const auto o = static_cast<std::size_t>(others[t]);
        if (!seen[o]) {
          seen[o] = 1;
          touched.push_back(others[t]);
        }
        dot[o] += fval[k] * ovals[t];
      }
    }
    const double sx = sq[static_cast<std::size_t>(e)];
    auto similarity = [&](int o) -> double {
      const double d = dot[static_cast<std::size_t>(o)];
      const double sy = sq[static_cast<std::size_t>(o)];
      double denom = 0.0;
      switch (kind) {
        case SimilarityKind::cosine:
          if (!params.normalize) return d / (1.0 + params.shrink);
          denom = std::sqrt(sx) * std::sqrt(sy) + params.shrink;
          return denom > 0 ? d / denom : 0.0;
        case SimilarityKind::asymmetric:
          if (sx <= 0 || sy <= 0) return 0.0;
          denom = std::pow(sx, params.alpha) * std::pow(sy, 1.0 - params.alpha) + params.shrink;
          return denom > 0 ? d / denom : 0.0;
        case SimilarityKind::dice:
          denom = sx + sy + params.shrink;
          return denom > 0 ? 2.0 * d / denom : 0.0;
        case SimilarityKind::jaccard:
          denom = sx + sy - d + params.shrink;
          return denom > 0 ? d / denom : 0.0;
        case SimilarityKind::tversky:
          denom = d + params.alpha * (sx - d) + params.beta * (sy - d) + params.shrink;
          return denom > 0 ? d / denom : 0.0;
        case SimilarityKind::euclidean: {
          double sq_dist = sx + sy - 2.0 * d;
          // Near-identical rows cancel; recompute those from the entries.
          if (sq_dist <= 1e-6 * (sx + sy)) sq_dist = squared_distance(entities, e, o);
          double dist = std::sqrt(std::max(0.0, sq_dist));
          if (params.normalize_avg_row && num_features > 0) dist /= num_features;
          if (params.from_distance == "lin") return 1.0 / (dist + params.shrink + kDistanceEps);
          if (params.from_distance == "log") return 1.0 / (std::log(dist + 1.0) + params.shrink + kDistanceEps);
          return std::exp(-dist) / (1.0 + params.shrink);
        }
      }
      return 0.0;
    };
    if (kind == SimilarityKind::euclidean) {
      // Every pair has a finite distance, co-rated or not.
      for (int o = 0; o < n; ++o) sim[static_cast<std::size_t>(o)] = o == e ? 0.0 : similarity(o);
    } else {
      for (int o : touched) sim[static_cast<std::size_t>(o)] = o == e ? 0.0 : similarity(o);
    }
    rows[static_cast<std::size_t>(e)] = top_k_nonzero(sim, params.top_k, e);
    for (int o : touched) {
      dot[static_cast<std::size_t>(o)] = 0.0;
      seen[static_cast<std::size_t>(o)] = 0;
      sim[static_cast<std::size_t>(o)] = 0.0;
    }
    if (kind == SimilarityKind::euclidean) std::fill(sim.begin(), sim.end(), 0.0);
  }
  return from_rows(n, n, std::move(rows));
}

CsrMatrix graph_similarity(const CsrMatrix& ratings, GraphVariant variant, int top_k, double alpha,
                           double beta, bool normalize_similarity, const Deadline& deadline) {
  if (alpha < 0.0 || alpha > 2.0) fail(ErrorCode::invalid_argument, "alpha outside [0, 2]");
  if (variant == GraphVariant::rp3beta && (beta < 0.0 || beta > 2.0)) {
    fail(ErrorCode::invalid_argument, "beta outside [0, 2]");
  }
  if (top_k < 1) fail(ErrorCode::invalid_argument, "top-K must be positive");
  const int n_items = ratings.cols();
  const CsrMatrix p_ui = map_values(l1_normalize_rows(ratings), [&](int, int, double v) { return std::pow(v, alpha); });
  const CsrMatrix p_iu =
      map_values(l1_normalize_rows(ratings.transpose().binarized()), [&](int, int, double v) { return std::pow(v, alpha); });
  const std::vector<int> popularity = ratings.col_counts();

  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n_items));
  std::vector<double> acc(static_cast<std::size_t>(n_items), 0.0);
  std::vector<int> touched;
  std::vector<char> seen(static_cast<std::size_t>(n_items), 0);
  for (int j = 0; j < n_items; ++j) {
    if ((j & 63) == 0) deadline.check("graph similarity", j > 0);
    touched.clear();
    auto users = p_iu.row_indices(j);
    auto w_ju = p_iu.row_values(j);
    for (std::size_t a = 0; a < users.size(); ++a) {
      auto items = p_ui.row_indices(users[a]);
      auto w_ui = p_ui.row_values(users[a]);
      for (std::size_t b = 0; b < items.size(); ++b) {
        const auto i = static_cast<std::size_t>(items[b]);
        if (!seen[i]) {
          seen[i] = 1;
          touched.push_back(items[b]);
        }
        acc[i] += w_ju[a] * w_ui[b];
      }
    }
    if (variant == GraphVariant::rp3beta) {
      for (int i : touched) {
        const double pop = popularity[static_cast<std::size_t>(i)];
        if (pop > 0) acc[static_cast<std::size_t>(i)] /= std::pow(pop, beta);
      }
    }
    acc[static_cast<std::size_t>(j)] = 0.0;
    rows[static_cast<std::size_t>(j)] = top_k_nonzero(acc, top_k, j);
    for (int i : touched) {
      acc[static_cast<std::size_t>(i)] = 0.0;
      seen[static_cast<std::size_t>(i)] = 0;
    }
  }
  CsrMatrix w = from_rows(n_items, n_items, std::move(rows));
  return normalize_similarity ? l1_normalize_rows(w) : w;
}

}  // namespace reczilla
