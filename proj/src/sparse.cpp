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

#include "reczilla/sparse.hpp"

#include <algorithm>
#include <numeric>

#include "reczilla/common.hpp"

namespace reczilla {

CsrMatrix::CsrMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), indptr_(static_cast<std::size_t>(rows) + 1, 0) {
  if (rows < 0 || cols < 0) fail(ErrorCode::invalid_argument, "negative matrix shape");
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  CsrMatrix m(rows, cols);
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  m.indices_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      fail(ErrorCode::invalid_argument, "triplet index out of range");
    }
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      fail(ErrorCode::invalid_argument, "duplicate triplet");
    }
    m.indptr_[static_cast<std::size_t>(t.row) + 1]++;
    m.indices_.push_back(t.col);
    m.values_.push_back(t.value);
  }
  std::partial_sum(m.indptr_.begin(), m.indptr_.end(), m.indptr_.begin());
  return m;
}

CsrMatrix CsrMatrix::from_dense(const Eigen::MatrixXd& dense, double drop_below) {
  CsrMatrix m(static_cast<int>(dense.rows()), static_cast<int>(dense.cols()));
  for (int r = 0; r < m.rows_; ++r) {
    for (int c = 0; c < m.cols_; ++c) {
      const double v = dense(r, c);
      if (v != 0.0 && std::abs(v) >= drop_below) {
        m.indices_.push_back(c);
        m.values_.push_back(v);
      }
    }
    m.indptr_[static_cast<std::size_t>(r) + 1] = static_cast<int>(m.values_.size());
  }
  return m;
}

CsrMatrix CsrMatrix::from_arrays(int rows, int cols, std::vector<int> indptr,
                                 std::vector<int> indices, std::vector<double> values) {
  if (static_cast<int>(indptr.size()) != rows + 1 || indices.size() != values.size() ||
      indptr.front() != 0 || indptr.back() != static_cast<int>(indices.size())) {
    fail(ErrorCode::invalid_argument, "inconsistent CSR arrays");
  }
  for (int r = 0; r < rows; ++r) {
    for (int k = indptr[r]; k < indptr[r + 1]; ++k) {
      if (indices[k] < 0 || indices[k] >= cols || (k > indptr[r] && indices[k] <= indices[k - 1])) {
        fail(ErrorCode::invalid_argument, "CSR column indices must be sorted and in range");
      }
    }
  }
  CsrMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.indptr_ = std::move(indptr);
  m.indices_ = std::move(indices);
  m.values_ = std::move(values);
  return m;
}

double CsrMatrix::at(int r, int c) const {
  auto idx = row_indices(r);
  auto it = std::lower_bound(idx.begin(), idx.end(), c);
  if (it == idx.end() || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(indptr_[r] + (it - idx.begin()))];
}

bool CsrMatrix::contains(int r, int c) const {
  auto idx = row_indices(r);
  return std::binary_search(idx.begin(), idx.end(), c);
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t(cols_, rows_);
  t.indices_.resize(indices_.size());
  t.values_.resize(values_.size());
  for (int c : indices_) t.indptr_[static_cast<std::size_t>(c) + 1]++;
  std::partial_sum(t.indptr_.begin(), t.indptr_.end(), t.indptr_.begin());
  std::vector<int> cursor(t.indptr_.begin(), t.indptr_.end() - 1);
  for (int r = 0; r < rows_; ++r) {
    for (int k = indptr_[r]; k < indptr_[r + 1]; ++k) {
      const int pos = cursor[static_cast<std::size_t>(indices_[k])]++;
      t.indices_[static_cast<std::size_t>(pos)] = r;
      t.values_[static_cast<std::size_t>(pos)] = values_[static_cast<std::size_t>(k)];
    }
  }
  return t;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int k = indptr_[r]; k < indptr_[r + 1]; ++k) d(r, indices_[k]) = values_[k];
  }
  return d;
}

CsrMatrix CsrMatrix::binarized() const {
  CsrMatrix b = *this;
  std::fill(b.values_.begin(), b.values_.end(), 1.0);
  return b;
}

std::vector<double> CsrMatrix::row_sums() const {
  std::vector<double> s(static_cast<std::size_t>(rows_), 0.0);
  for (int r = 0; r < rows_; ++r) {
    for (double v : row_values(r)) s[static_cast<std::size_t>(r)] += v;
  }
  return s;
}

std::vector<double> CsrMatrix::col_sums() const {
  std::vector<double> s(static_cast<std::size_t>(cols_), 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k) s[static_cast<std::size_t>(indices_[k])] += values_[k];
  return s;
}

std::vector<int> CsrMatrix::col_counts() const {
  std::vector<int> s(static_cast<std::size_t>(cols_), 0);
  for (int c : indices_) s[static_cast<std::size_t>(c)]++;
  return s;
}

std::vector<std::pair<int, double>> top_k_nonzero(std::span<const double> row, int k,
                                                  int exclude) {
  std::vector<std::pair<int, double>> entries;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (static_cast<int>(j) == exclude || row[j] == 0.0) continue;
    entries.emplace_back(static_cast<int>(j), row[j]);
  }
  auto better = [](const std::pair<int, double>& a, const std::pair<int, double>& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  if (k >= 0 && static_cast<int>(entries.size()) > k) {
    std::nth_element(entries.begin(), entries.begin() + k, entries.end(), better);
    entries.resize(static_cast<std::size_t>(k));
  }
  std::sort(entries.begin(), entries.end(), better);
  return entries;
}

}  // namespace reczilla
