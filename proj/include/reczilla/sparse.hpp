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

#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace reczilla {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix with sorted, unique column indices per row.
/// Immutable after construction.
class CsrMatrix {
 public:
  CsrMatrix() : indptr_(1, 0) {}
  CsrMatrix(int rows, int cols);

  /// Builds from triplets; duplicates (same row, col) are an error.
  static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);
  static CsrMatrix from_dense(const Eigen::MatrixXd& dense, double drop_below = 0.0);
  /// Takes ownership of already-valid CSR arrays (validated).
  static CsrMatrix from_arrays(int rows, int cols, std::vector<int> indptr,
                               std::vector<int> indices, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  std::span<const int> row_indices(int r) const {
    return {indices_.data() + indptr_[r], static_cast<std::size_t>(indptr_[r + 1] - indptr_[r])};
  }
  std::span<const double> row_values(int r) const {
    return {values_.data() + indptr_[r], static_cast<std::size_t>(indptr_[r + 1] - indptr_[r])};
  }
  int row_nnz(int r) const { return indptr_[r + 1] - indptr_[r]; }
  int row_begin(int r) const { return indptr_[r]; }

  const std::vector<int>& indptr() const { return indptr_; }
  const std::vector<int>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  /// Value at (r, c), 0 when not stored.
  double at(int r, int c) const;
  bool contains(int r, int c) const;

  CsrMatrix transpose() const;
  Eigen::MatrixXd to_dense() const;
  /// Same pattern with every stored value replaced by 1.
  CsrMatrix binarized() const;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  std::vector<int> col_counts() const;

  bool operator==(const CsrMatrix& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> indptr_;
  std::vector<int> indices_;
  std::vector<double> values_;
};

/// Keeps the `k` largest entries of a dense score row (ties to the lower
/// index), skipping `exclude` and entries equal to zero.
std::vector<std::pair<int, double>> top_k_nonzero(std::span<const double> row, int k,
                                                  int exclude = -1);

}  // namespace reczilla
