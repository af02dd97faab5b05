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

#include "gdca/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "gdca/engine.hpp"
#include "gdca/errors.hpp"

namespace gdca {

namespace {

void require_smooth(double gamma, const char* what) {
  if (!(gamma > 0.0)) {
    throw DomainError(std::string(what) + " needs a smooth loss (gamma > 0)");
  }
}

}  // namespace

double local_rate_constant(double lambda, double m, double gamma) {
  const double s = lambda * m * gamma;
  return s / (1.0 + s);
}

double separability_constant(double lambda, double m, double gamma, double rho) {
  const double s = lambda * m * gamma;
  return s / (rho + s);
}

double theta_p(double lambda, double m, double gamma, double m_B, int T_p) {
  require_smooth(gamma, "theta_p");
  if (!(m_B >= 1.0)) throw DomainError("theta_p needs m_B >= 1");
  if (T_p < 0) throw DomainError("theta_p needs T_p >= 0");
  return std::pow(1.0 - local_rate_constant(lambda, m, gamma) / m_B, T_p);
}

double convergence_bound(const BoundInputs& in) {
  require_smooth(in.gamma, "convergence_bound");
  if (in.thetas.empty() || in.thetas.size() != in.betas.size()) {
    throw DomainError("convergence_bound needs one theta per beta");
  }
  if (in.rho < 0.0) throw DomainError("convergence_bound needs rho >= 0");
  if (in.T < 1) throw DomainError("convergence_bound needs T >= 1");
  double sum = 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < in.thetas.size(); ++k) {
    if (!(in.thetas[k] >= 0.0 && in.thetas[k] < 1.0)) {
      throw DomainError("theta values must lie in [0, 1)");
    }
    if (!(in.betas[k] >= 0.0 && in.betas[k] <= 1.0)) {
      throw DomainError("beta values must lie in [0, 1]");
    }
    sum += in.betas[k];
    worst = std::max(worst, 1.0 - (1.0 - in.thetas[k]) * in.betas[k]);
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("betas must sum to 1");
  const double c2 = separability_constant(in.lambda, in.m, in.gamma, in.rho);
  return std::pow(worst * c2, in.T);
}

double rho_min(const Dataset& ds, [[maybe_unused]] double lambda,
               std::span<const std::vector<std::size_t>> blocks,
               const PowerIterationOptions& options) {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  if (n == 0) throw DomainError("rho_min needs a nonempty index set");
  if (blocks.size() <= 1) return 0.0;

  const std::size_t d = ds.d();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  for (const auto& b : blocks) {
    for (const std::size_t i : b) {
      const auto x = ds.dense_column(i);
      const Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
      gram.noalias() += xv * xv.transpose();
    }
  }
  // The operator is bounded below by -X^T X, so shifting by a bit more than
  // |X|^2 makes it positive definite and the top eigenvalue dominant.
  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                         gram, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  if (!(top > 0.0)) return 0.0;
  const double shift = 1.01 * top;

  std::vector<std::size_t> begin(blocks.size() + 1, 0);
  for (std::size_t k = 0; k < blocks.size(); ++k) begin[k + 1] = begin[k] + blocks[k].size();

  std::vector<double> total(d);
  std::vector<std::vector<double>> partial(blocks.size(), std::vector<double>(d));
  const auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::fill(total.begin(), total.end(), 0.0);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      auto& u = partial[k];
      std::fill(u.begin(), u.end(), 0.0);
      for (std::size_t j = 0; j < blocks[k].size(); ++j) {
        ds.axpy(blocks[k][j], v[begin[k] + j], u);
      }
      for (std::size_t r = 0; r < d; ++r) total[r] += u[r];
    }
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      for (std::size_t j = 0; j < blocks[k].size(); ++j) {
        const std::size_t i = blocks[k][j];
        const std::size_t pos = begin[k] + j;
        out[pos] = ds.dot(i, partial[k]) - ds.dot(i, total) + shift * v[pos];
      }
    }
  };

  std::vector<double> v(n);
  std::vector<double> bv(n);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  double norm = 0.0;
  for (auto& e : v) {
    e = normal(rng);
    norm += e * e;
  }
  norm = std::sqrt(norm);
  for (auto& e : v) e /= norm;

  for (int it = 0; it < options.max_iterations; ++it) {
    apply(v, bv);
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += v[j] * bv[j];
    double residual = 0.0;
    double bnorm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = bv[j] - mu * v[j];
      residual += r * r;
      bnorm += bv[j] * bv[j];
    }
    if (std::sqrt(residual) <= options.tolerance * shift) {
      return std::max(0.0, mu - shift);
    }
    bnorm = std::sqrt(bnorm);
    for (std::size_t j = 0; j < n; ++j) v[j] = bv[j] / bnorm;
  }
  throw ConvergenceError("rho_min power iteration did not converge in " +
                         std::to_string(options.max_iterations) + " iterations");
}

double lambert_w0(double x) {
  constexpr double kBranch = -1.0 / std::numbers::e;
  if (std::isnan(x) || x < kBranch) {
    throw DomainError("lambert_w0 is defined for x >= -1/e");
  }
  if (x == kBranch) return -1.0;

  double w;
  if (x < -0.32) {
    // Series about the branch point.
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < 3.0) {
    w = std::log1p(x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (f == 0.0) break;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

namespace {

void check_tp_domain(double c1, double c2, double n_k, double n_Q, double r) {
  if (!(c1 >= 0.0 && c1 < 1.0) || !(c2 >= 0.0 && c2 < 1.0)) {
    throw DomainError("c1 and c2 must lie in [0, 1)");
  }
  if (!(n_k >= 1.0) || !(n_Q >= n_k)) throw DomainError("need 1 <= n_k <= n_Q");
  if (!(c1 / n_k < 1.0) || !(c2 * n_k / n_Q < 1.0)) {
    throw DomainError("need c1/n_k < 1 and c2 n_k/n_Q < 1");
  }
  if (!(r >= 0.0)) throw DomainError("delay severity r must be >= 0");
}

}  // namespace

double optimal_tp(double c1, double c2, double n_k, double n_Q, double r) {
  check_tp_domain(c1, c2, n_k, n_Q, r);
  if (c1 == 0.0) throw DomainError("optimal_tp is undefined for c1 = 0");
  const double log_a = std::log1p(-c1 / n_k);
  const double z = std::exp(r * log_a) * std::log1p(-c2 * n_k / n_Q);
  if (z < -1.0 / std::numbers::e) {
    throw DomainError("optimal_tp: Lambert W argument " + std::to_string(z) +
                      " is below -1/e");
  }
  return lambert_w0(z) / log_a - r;
}

double tp_log_objective(double T, double c1, double c2, double n_k, double n_Q, double r) {
  const double a_pow = std::exp(T * std::log1p(-c1 / n_k));
  return std::log1p(-(1.0 - a_pow) * c2 * n_k / n_Q) / (T + r);
}

std::int64_t optimal_tp_numeric(double c1, double c2, double n_k, double n_Q, double r,
                                std::int64_t max_T) {
  check_tp_domain(c1, c2, n_k, n_Q, r);
  if (c1 == 0.0 || c2 == 0.0) return 1;
  // Past this point (1 - c1/n_k)^T < e^-40 and the objective only rises.
  const double horizon = std::ceil(40.0 * n_k / c1 + r);
  const std::int64_t upper =
      std::min<std::int64_t>(max_T, static_cast<std::int64_t>(horizon));
  std::int64_t best_T = 1;
  double best = tp_log_objective(1.0, c1, c2, n_k, n_Q, r);
  for (std::int64_t T = 2; T <= upper; ++T) {
    const double v = tp_log_objective(static_cast<double>(T), c1, c2, n_k, n_Q, r);
    if (v < best) {
      best = v;
      best_T = T;
    }
  }
  return best_T;
}

std::vector<double> block_maximizer(const Dataset& ds, const LossSpec& loss, double lambda,
                                    std::span<const double> alpha,
                                    std::span<const std::size_t> block) {
  if (loss.family != LossFamily::kSquaredError) {
    throw Unsupported("exact block maximization is only available for squared loss");
  }
  const std::size_t d = ds.d();
  const std::size_t n = block.size();
  const double lambda_m = lambda * static_cast<double>(ds.m());

  auto w_rest = primal_from_dual(ds, lambda, alpha);
  for (const std::size_t i : block) ds.axpy(i, -alpha[i] / lambda_m, w_rest);

  // Stationarity: ((1/(lambda m)) X_B^T X_B + I/2) a = y_B - X_B^T w_rest,
  // solved through the d x d system S = (lambda m / 2) I + X_B X_B^T.
  Eigen::MatrixXd xb(d, n);
  Eigen::VectorXd rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto x = ds.dense_column(block[j]);
    xb.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(x.data(), d);
    rhs(static_cast<Eigen::Index>(j)) = ds.label(block[j]) - ds.dot(block[j], w_rest);
  }
  Eigen::MatrixXd s = xb * xb.transpose();
  s.diagonal().array() += 0.5 * lambda_m;
  const Eigen::VectorXd inner = s.llt().solve(xb * rhs);
  const Eigen::VectorXd solution = 2.0 * (rhs - xb.transpose() * inner);

  std::vector<double> out(alpha.begin(), alpha.end());
  for (std::size_t j = 0; j < n; ++j) out[block[j]] = solution(static_cast<Eigen::Index>(j));
  return out;
}

double block_suboptimality_gap(const Dataset& ds, const LossSpec& loss, double lambda,
                               std::span<const double> alpha,
                               std::span<const std::size_t> block) {
  const auto best = block_maximizer(ds, loss, lambda, alpha, block);
  const double m = static_cast<double>(ds.m());
  const double lambda_m = lambda * m;
  // The dual is quadratic in the block, so the gap is the Hessian norm of the
  // step: (1/2m) ((1/(lambda m)) |X_B delta|^2 + |delta|^2 / 2).
  std::vector<double> xdelta(ds.d(), 0.0);
  double delta2 = 0.0;
  for (const std::size_t i : block) {
    const double delta = best[i] - alpha[i];
    delta2 += delta * delta;
    ds.axpy(i, delta, xdelta);
  }
  double xd2 = 0.0;
  for (const double v : xdelta) xd2 += v * v;
  return (xd2 / lambda_m + 0.5 * delta2) / (2.0 * m);
}

}  // namespace gdca
