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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gdca/dataset.hpp"
#include "gdca/losses.hpp"

namespace gdca {

// lambda m gamma / (1 + lambda m gamma)
double local_rate_constant(double lambda, double m, double gamma);
// lambda m gamma / (rho + lambda m gamma)
double separability_constant(double lambda, double m, double gamma, double rho);

// Local improvement factor of LocalSDCA on a block of m_B points after T_p
// steps: (1 - c1 / m_B)^T_p. Requires a smooth loss (gamma > 0).
double theta_p(double lambda, double m, double gamma, double m_B, int T_p);

struct BoundInputs {
  double lambda = 1.0;
  double m = 1.0;
  double gamma = 0.5;
  std::vector<double> thetas;  // per child, in [0, 1)
  std::vector<double> betas;   // per child, summing to 1
  double rho = 0.0;
  int T = 1;
};

// ( max_k (1 - (1 - theta_k) beta_k) * lambda m gamma / (rho + lambda m gamma) )^T
double convergence_bound(const BoundInputs& in);

struct PowerIterationOptions {
  double tolerance = 1e-10;  // residual, relative to the spectral shift
  int max_iterations = 1000000;
};

// Largest eigenvalue of lambda^2 m^2 (blockdiag_k(A_k^T A_k) - A_Q^T A_Q) over
// the concatenated blocks, i.e. the maximal Rayleigh quotient defining the
// block separability constant. The lambda m factors cancel against the
// 1/(lambda m) column scaling, so the value depends on the raw features only.
// Computed matrix-free by shifted power iteration.
double rho_min(const Dataset& ds, double lambda,
               std::span<const std::vector<std::size_t>> blocks,
               const PowerIterationOptions& options = {});

// Principal branch W0 via Halley iteration. x >= -1/e.
double lambert_w0(double x);

// Closed-form optimal leaf iteration count
//   T_p = W0((1 - c1/n_k)^r ln(1 - c2 n_k / n_Q)) / ln(1 - c1/n_k) - r.
double optimal_tp(double c1, double c2, double n_k, double n_Q, double r);

// ln of the execution-time objective per unit t_total/t_lp:
//   ln(1 - (1 - (1 - c1/n_k)^T) c2 n_k / n_Q) / (T + r)
// Its minimizer over T is the minimizer of the full objective.
double tp_log_objective(double T, double c1, double c2, double n_k, double n_Q, double r);

// Smallest integer T >= 1 minimizing tp_log_objective, by exhaustive search.
// Returns 1 when the objective is flat.
std::int64_t optimal_tp_numeric(double c1, double c2, double n_k, double n_Q, double r,
                                std::int64_t max_T = 100000000);

// Dual improvement available from re-optimizing only `block` with every other
// coordinate fixed (squared loss only; hinge throws Unsupported).
double block_suboptimality_gap(const Dataset& ds, const LossSpec& loss, double lambda,
                               std::span<const double> alpha,
                               std::span<const std::size_t> block);

// Exact maximizer of the dual over `block` (squared loss), returned as a full
// alpha vector with the block replaced.
std::vector<double> block_maximizer(const Dataset& ds, const LossSpec& loss, double lambda,
                                    std::span<const double> alpha,
                                    std::span<const std::size_t> block);

}  // namespace gdca
