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

#include "gdca/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdca/errors.hpp"

namespace gdca {

namespace {

constexpr double kHingeDomainSlack = 1e-12;

}  // namespace

LossSpec loss_from_name(std::string_view name) {
  if (name == "squared" || name == "squared_error") return LossSpec::squared_error();
  if (name == "hinge") return LossSpec::hinge();
  throw ConfigError("unknown loss '" + std::string(name) +
                    "' (expected squared or hinge)");
}

std::string_view loss_name(const LossSpec& spec) {
  return spec.family == LossFamily::kHinge ? "hinge" : "squared";
}

double primal_loss(const LossSpec& spec, double a, double y) {
  switch (spec.family) {
    case LossFamily::kSquaredError:
      return (a - y) * (a - y);
    case LossFamily::kHinge:
      return std::max(0.0, 1.0 - y * a);
  }
  return 0.0;
}

double conjugate(const LossSpec& spec, double b, double y) {
  switch (spec.family) {
    case LossFamily::kSquaredError:
      return 0.25 * b * b + y * b;
    case LossFamily::kHinge: {
      const double s = -b * y;
      if (!(s >= -kHingeDomainSlack && s <= 1.0 + kHingeDomainSlack)) {
        throw DomainError("hinge conjugate evaluated outside its domain: -b*y = " +
                          std::to_string(s));
      }
      return y * b;
    }
  }
  return 0.0;
}

double coordinate_update(const LossSpec& spec, double wx, double alpha_i,
                         double xnorm2, double lambda, double m, double y) {
  if (!(xnorm2 > 0.0)) {
    throw DomainError("coordinate_update requires |x|^2 > 0");
  }
  const double lambda_m = lambda * m;
  switch (spec.family) {
    case LossFamily::kSquaredError:
      return (y - wx - 0.5 * alpha_i) / (xnorm2 / lambda_m + 0.5);
    case LossFamily::kHinge: {
      const double target = lambda_m * (1.0 - y * wx) / xnorm2 + alpha_i * y;
      return y * std::clamp(target, 0.0, 1.0) - alpha_i;
    }
  }
  return 0.0;
}

double zero_column_update(const LossSpec& spec, double alpha_i, double y) {
  switch (spec.family) {
    case LossFamily::kSquaredError:
      // argmax_a { a y - a^2 / 4 } = 2 y
      return 2.0 * y - alpha_i;
    case LossFamily::kHinge:
      return y - alpha_i;
  }
  return 0.0;
}

double coordinate_objective(const LossSpec& spec, double delta, double wx,
                            double alpha_i, double xnorm2, double lambda,
                            double m, double y) {
  // |w + delta x/(lambda m)|^2 expanded, dropping the constant |w|^2.
  const double lambda_m = lambda * m;
  const double quad = 2.0 * delta * wx / lambda_m +
                      delta * delta * xnorm2 / (lambda_m * lambda_m);
  return -0.5 * lambda_m * quad - conjugate(spec, -(alpha_i + delta), y);
}

}  // namespace gdca
