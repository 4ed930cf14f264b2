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

#include "asd/optimizer.h"

#include <cmath>
#include <limits>
#include <sstream>

#include <ceres/ceres.h>

#include "asd/model_core.h"

namespace asd {
namespace {

class ObjectiveAdapter : public ceres::FirstOrderFunction {
 public:
  ObjectiveAdapter(const SmoothObjective& objective, int dim)
      : objective_(objective), dim_(dim), x_(dim), gradient_(dim) {}

  bool Evaluate(const double* parameters, double* cost,
                double* gradient) const override {
    x_ = Eigen::Map<const Eigen::VectorXd>(parameters, dim_);
    gradient_.setZero();
    const double value = objective_(x_, &gradient_);
    if (!std::isfinite(value) || !gradient_.allFinite()) {
      if (bad_evaluations_++ == 0) {
        std::ostringstream msg;
        msg << "non-finite objective (" << value << ") at |x|_inf = "
            << x_.lpNorm<Eigen::Infinity>();
        diagnostic_ = msg.str();
      }
      return false;
    }
    *cost = value;
    if (gradient != nullptr) {
      Eigen::Map<Eigen::VectorXd>(gradient, dim_) = gradient_;
    }
    return true;
  }

  int NumParameters() const override { return dim_; }

  int bad_evaluations() const { return bad_evaluations_; }
  const std::string& diagnostic() const { return diagnostic_; }

 private:
  const SmoothObjective& objective_;
  const int dim_;
  mutable Eigen::VectorXd x_;
  mutable Eigen::VectorXd gradient_;
  mutable int bad_evaluations_ = 0;
  mutable std::string diagnostic_;
};

}  // namespace

MinimizerResult MinimizeLbfgs(const SmoothObjective& objective,
                              const Eigen::VectorXd& x0,
                              const MinimizerOptions& options) {
  const int dim = static_cast<int>(x0.size());
  MinimizerResult result;
  result.x = x0;

  auto* adapter = new ObjectiveAdapter(objective, dim);
  ceres::GradientProblem problem(adapter);  // takes ownership

  ceres::GradientProblemSolver::Options solver_options;
  solver_options.line_search_direction_type = ceres::LBFGS;
  solver_options.line_search_type = ceres::WOLFE;
  solver_options.max_lbfgs_rank = options.lbfgs_rank;
  solver_options.max_num_iterations = options.max_iters;
  solver_options.gradient_tolerance = options.grad_tol;
  // Only the gradient test and the iteration cap end a healthy run.
  solver_options.function_tolerance = 0.0;
  solver_options.parameter_tolerance = 0.0;
  solver_options.logging_type = ceres::SILENT;
  solver_options.minimizer_progress_to_stdout = false;

  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(solver_options, problem, result.x.data(), &summary);

  // Rejected line-search steps are dropped; the trace keeps accepted iterates.
  for (const ceres::IterationSummary& it : summary.iterations) {
    if (it.iteration == 0 || it.step_is_successful) {
      result.iterations.push_back({it.iteration, it.cost, it.gradient_max_norm});
    }
  }

  if (adapter->bad_evaluations() > 0) {
    throw NumericalError(adapter->diagnostic());
  }
  if (!result.x.allFinite()) {
    throw NumericalError("minimizer produced a non-finite iterate");
  }
  if (!summary.IsSolutionUsable() && result.iterations.empty()) {
    throw NumericalError("minimizer failed: " + summary.message);
  }
  // A stalled line search also ends with CONVERGENCE; only the gradient
  // test counts.
  result.converged = summary.termination_type == ceres::CONVERGENCE &&
                     !result.iterations.empty() &&
                     result.iterations.back().grad_norm <= options.grad_tol;
  result.message = summary.message;
  return result;
}

}  // namespace asd
