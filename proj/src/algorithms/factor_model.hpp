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

#include "internal.hpp"

namespace reczilla::detail {

/// score(u, i) = p_u . q_i [+ mu + b_u + b_i]
class FactorModel : public Recommender {
 public:
  FactorModel(Eigen::MatrixXd user, Eigen::MatrixXd item) : user_(std::move(user)), item_(std::move(item)) {}
  FactorModel(Eigen::MatrixXd user, Eigen::MatrixXd item, double global_bias, Eigen::VectorXd user_bias,
              Eigen::VectorXd item_bias)
      : user_(std::move(user)), item_(std::move(item)), global_bias_(global_bias),
        user_bias_(std::move(user_bias)), item_bias_(std::move(item_bias)) {}

  void score(int user, std::span<double> out) const override;
  const Eigen::MatrixXd* dense_state(std::string_view name) const override;

 private:
  Eigen::MatrixXd user_;
  Eigen::MatrixXd item_;
  double global_bias_ = 0.0;
  Eigen::VectorXd user_bias_;
  Eigen::VectorXd item_bias_;
};

}  // namespace reczilla::detail
