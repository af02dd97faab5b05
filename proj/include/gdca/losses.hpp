// Copyright 2026 The GDCA-Tree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string_view>

namespace gdca {

enum class LossFamily { kSquaredError, kHinge };

// A loss family together with its smoothness constant. Losses are
// 1/gamma-smooth; gamma == 0 marks a non-smooth loss.
struct LossSpec {
  LossFamily family = LossFamily::kSquaredError;
  double gamma = 0.5;

  static LossSpec squared_error() { return {LossFamily::kSquaredError, 0.5}; }
  static LossSpec hinge() { return {LossFamily::kHinge, 0.0}; }

  bool smooth() const { return gamma > 0.0; }
};

LossSpec loss_from_name(std::string_view name);
std::string_view loss_name(const LossSpec& spec);

// l(a) for label y: (a - y)^2 or max(0, 1 - y a).
double primal_loss(const LossSpec& spec, double a, double y);

// Convex conjugate l*(b). For hinge the effective domain is -b*y in [0, 1]
// (a 1e-12 slack absorbs rounding); outside it DomainError is thrown.
double conjugate(const LossSpec& spec, double b, double y);

// Exact maximizer of the single-coordinate dual subproblem
//
//   -(lambda m / 2) |w + delta x / (lambda m)|^2 - l*(-(alpha_i + delta))
//
// given wx = w.x and xnorm2 = |x|^2 > 0. Hinge labels must be +-1.
double coordinate_update(const LossSpec& spec, double wx, double alpha_i,
                         double xnorm2, double lambda, double m, double y);

// Limit of the coordinate update for an all-zero feature column, where the
// quadratic term vanishes and only the conjugate is maximized.
double zero_column_update(const LossSpec& spec, double alpha_i, double y);

// Value of the single-coordinate objective above (used by the oracle tests
// and by callers that want to check monotonicity).
double coordinate_objective(const LossSpec& spec, double delta, double wx,
                            double alpha_i, double xnorm2, double lambda,
                            double m, double y);

}  // namespace gdca
