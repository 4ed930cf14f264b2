// Copyright 2026 The asd Authors. All Rights Reserved.
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

#ifndef ASD_OPTIMIZER_H_
#define ASD_OPTIMIZER_H_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace asd {

// Returns f(x) and writes the gradient into |gradient|.
using SmoothObjective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* gradient)>;

struct MinimizerOptions {
  int max_iters = 500;
  // Stop once the infinity norm of the gradient falls to this value.
  double grad_tol = 1e-6;
  int lbfgs_rank = 20;
};

struct MinimizerIteration {
  int iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;  // infinity norm
};

struct MinimizerResult {
  Eigen::VectorXd x;
  std::vector<MinimizerIteration> iterations;
  bool converged = false;  // gradient tolerance met
  std::string message;
};

// L-BFGS with a strong-Wolfe line search, deterministic for identical
// inputs. Throws NumericalError if the objective or gradient is ever
// non-finite.
MinimizerResult MinimizeLbfgs(const SmoothObjective& objective,
                              const Eigen::VectorXd& x0,
                              const MinimizerOptions& options);

}  // namespace asd

#endif  // ASD_OPTIMIZER_H_
