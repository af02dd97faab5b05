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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gdca/analysis.hpp"
#include "gdca/engine.hpp"
#include "gdca/errors.hpp"
#include "oracles.hpp"

namespace gdca {
namespace {

const LossSpec kSquared = LossSpec::squared_error();

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t i = lo; i < hi; ++i) out.push_back(i);
  return out;
}

TEST(ThetaP, Examples) {
  EXPECT_EQ(theta_p(1.0, 100.0, 0.5, 10.0, 0), 1.0);
  EXPECT_DOUBLE_EQ(theta_p(1.0, 1.0, 1.0, 1.0, 1), 0.5);
  EXPECT_LT(theta_p(1.0, 100.0, 0.5, 10.0, 20), theta_p(1.0, 100.0, 0.5, 100.0, 20));
}

TEST(ThetaP, Errors) {
  EXPECT_THROW(theta_p(1.0, 10.0, 0.0, 5.0, 3), DomainError);
  EXPECT_THROW(theta_p(1.0, 10.0, 0.5, 0.5, 3), DomainError);
  EXPECT_THROW(theta_p(1.0, 10.0, 0.5, 5.0, -1), DomainError);
}

TEST(ThetaP, Monotonicity) {
  for (double mb = 1.0; mb < 500.0; mb *= 1.7) {
    for (int t = 0; t < 50; t += 7) {
      EXPECT_GT(theta_p(0.1, 200.0, 0.5, mb, t), theta_p(0.1, 200.0, 0.5, mb, t + 1));
      if (t > 0) {
        EXPECT_LT(theta_p(0.1, 200.0, 0.5, mb, t), theta_p(0.1, 200.0, 0.5, mb + 1.0, t));
      }
    }
  }
}

TEST(ConvergenceBound, Examples) {
  BoundInputs in{1.0, 10.0, 0.5, {0.0}, {1.0}, 2.0, 3};
  EXPECT_EQ(convergence_bound(in), 0.0);

  const double c2 = separability_constant(1.0, 10.0, 0.5, 2.0);
  in.thetas = {1.0 - 1e-15};
  EXPECT_NEAR(convergence_bound(in), std::pow(c2, 3), 1e-12);

  // c2 = 1 requires rho = 0.
  BoundInputs two{1.0, 10.0, 0.5, {0.5, 0.5}, {0.5, 0.5}, 0.0, 1};
  EXPECT_DOUBLE_EQ(convergence_bound(two), 0.75);
}

TEST(ConvergenceBound, Errors) {
  BoundInputs in{1.0, 10.0, 0.0, {0.5}, {1.0}, 0.0, 1};
  EXPECT_THROW(convergence_bound(in), DomainError);
  in.gamma = 0.5;
  in.betas = {0.6};
  EXPECT_THROW(convergence_bound(in), DomainError);
  in.betas = {0.5, 0.5};
  EXPECT_THROW(convergence_bound(in), DomainError);
}

TEST(ConvergenceBound, InUnitInterval) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + trial % 6;
    BoundInputs in;
    in.lambda = 1e-3 + u(rng);
    in.m = 1.0 + 1000.0 * u(rng);
    in.gamma = 0.5;
    in.rho = 10.0 * u(rng);
    in.T = 1 + trial % 9;
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      in.thetas.push_back(u(rng) * 0.999);
      in.betas.push_back(0.01 + u(rng));
      s += in.betas.back();
    }
    for (auto& b : in.betas) b /= s;
    const double v = convergence_bound(in);
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(RhoMin, SingleBlockIsZero) {
  const auto ds = testing::random_dataset(6, 20, false, 1);
  const std::vector<std::vector<std::size_t>> blocks{range(0, 20)};
  EXPECT_EQ(rho_min(ds, 1.0, blocks), 0.0);
}

TEST(RhoMin, OrthogonalBlocksAreZero) {
  // Block 0 lives in span{e0, e1}, block 1 in span{e2, e3}.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::vector<double> f(4 * 10, 0.0);
  for (std::size_t i = 0; i < 10; ++i) {
    const std::size_t off = i < 5 ? 0 : 2;
    f[4 * i + off] = n(rng);
    f[4 * i + off + 1] = n(rng);
  }
  const auto ds = Dataset::from_dense(4, 10, f, std::vector<double>(10, 1.0));
  const std::vector<std::vector<std::size_t>> blocks{range(0, 5), range(5, 10)};
  EXPECT_NEAR(testing::dense_rho_min(ds, blocks), 0.0, 1e-12);
  EXPECT_NEAR(rho_min(ds, 1.0, blocks), 0.0, 1e-8);
}

TEST(RhoMin, MatchesDenseEigensolver) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ds = testing::random_dataset(10, 12, false, 10 + seed);
    const std::vector<std::vector<std::size_t>> blocks{range(0, 3), range(3, 7), range(7, 12)};
    const double expected = testing::dense_rho_min(ds, blocks);
    const double got = rho_min(ds, 0.37, blocks);
    EXPECT_GE(got, 0.0);
    EXPECT_NEAR(got, expected, 1e-6 * std::max(1.0, std::abs(expected)));
    // lambda cancels.
    EXPECT_NEAR(rho_min(ds, 5.0, blocks), got, 1e-7 * std::max(1.0, got));
  }
}

TEST(RhoMin, SubsetOfData) {
  const auto ds = testing::random_dataset(5, 30, false, 3);
  const std::vector<std::vector<std::size_t>> blocks{{1, 4, 9}, {12, 13}, {20, 25, 29, 2}};
  EXPECT_NEAR(rho_min(ds, 1.0, blocks), testing::dense_rho_min(ds, blocks), 1e-6);
}

TEST(RhoMin, IterationCap) {
  const auto ds = testing::random_dataset(10, 12, false, 4);
  const std::vector<std::vector<std::size_t>> blocks{range(0, 6), range(6, 12)};
  EXPECT_THROW(rho_min(ds, 1.0, blocks, {1e-10, 2}), ConvergenceError);
}

TEST(LambertW, Examples) {
  EXPECT_EQ(lambert_w0(0.0), 0.0);
  EXPECT_NEAR(lambert_w0(std::numbers::e), 1.0, 1e-14);
  EXPECT_NEAR(lambert_w0(-1.0 / std::numbers::e), -1.0, 1e-7);
  EXPECT_NEAR(lambert_w0(1.0), 0.5671432904097838, 1e-15);
  EXPECT_THROW(lambert_w0(-0.37), DomainError);
}

TEST(LambertW, InvertsDefiningIdentity) {
  for (int k = 0; k <= 600; ++k) {
    const double x = -1.0 + 6.0 * k / 600.0;
    const double z = x * std::exp(x);
    const double w = lambert_w0(z);
    EXPECT_LE(std::abs(w * std::exp(w) - z), 1e-12 * std::max(1.0, std::abs(z)));
    EXPECT_NEAR(w, x, x < -0.9 ? 1e-6 : 1e-10);
  }
  for (double z = 1.0; z < 1e300; z *= 10.0) {
    const double w = lambert_w0(z);
    EXPECT_NEAR(std::log(w) + w, std::log(z), 1e-12 * std::max(1.0, std::log(z)));
  }
}

TEST(OptimalTp, SatisfiesDefiningIdentity) {
  // T = W(z)/ln a - r  <=>  (T + r) ln a * a^(T + r) = z, z = a^r ln(1 - q).
  const double c1 = 0.3, c2 = 0.2, nk = 200.0, nq = 1000.0, r = 5.0;
  const double t = optimal_tp(c1, c2, nk, nq, r);
  const double a = 1.0 - c1 / nk;
  const double lhs = (t + r) * std::log(a) * std::pow(a, t + r);
  const double z = std::pow(a, r) * std::log(1.0 - c2 * nk / nq);
  EXPECT_NEAR(lhs, z, 1e-12);
}

TEST(OptimalTp, ProportionalToBlockSizeWhenDelayIsNegligible) {
  // Holding n_k / n_Q fixed, the closed form at r = 0 grows linearly in n_k.
  const double c1 = 0.05, c2 = 0.05, ratio = 0.2;
  const double ref = optimal_tp(c1, c2, 100.0, 100.0 / ratio, 0.0) / 100.0;
  for (const double nk : {100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0}) {
    const double t = optimal_tp(c1, c2, nk, nk / ratio, 0.0);
    EXPECT_NEAR(t / nk, ref, 0.2 * std::abs(ref));
  }
}

TEST(OptimalTp, Errors) {
  EXPECT_THROW(optimal_tp(1.0, 0.2, 10, 100, 0), DomainError);
  EXPECT_THROW(optimal_tp(0.2, 1.0, 10, 100, 0), DomainError);
  EXPECT_THROW(optimal_tp(0.2, 0.2, 0.5, 100, 0), DomainError);
  EXPECT_THROW(optimal_tp(0.2, 0.2, 10, 100, -1), DomainError);
  EXPECT_THROW(optimal_tp(0.5, 0.5, 0.4, 100, 0), DomainError);
}

TEST(OptimalTpNumeric, FlatObjectiveGivesOne) {
  EXPECT_EQ(optimal_tp_numeric(0.3, 0.0, 50, 100, 3), 1);
}

TEST(OptimalTpNumeric, IsIntegerArgmin) {
  for (const double r : {0.0, 1.0, 10.0, 100.0}) {
    const double c1 = 0.4, c2 = 0.3, nk = 50, nq = 200;
    const auto t = optimal_tp_numeric(c1, c2, nk, nq, r);
    const double best = tp_log_objective(static_cast<double>(t), c1, c2, nk, nq, r);
    for (std::int64_t s = 1; s < 20000; ++s) {
      ASSERT_GE(tp_log_objective(static_cast<double>(s), c1, c2, nk, nq, r), best);
    }
  }
}

TEST(BlockGap, OptimalBlockIsZero) {
  const auto ds = testing::random_dataset(4, 30, false, 6);
  const auto block = range(5, 17);
  std::vector<double> alpha(30, 0.3);
  const auto opt = block_maximizer(ds, kSquared, 0.2, alpha, block);
  for (std::size_t i = 0; i < 30; ++i) {
    if (i < 5 || i >= 17) EXPECT_EQ(opt[i], alpha[i]);
  }
  EXPECT_GT(block_suboptimality_gap(ds, kSquared, 0.2, alpha, block), 0.0);
  EXPECT_NEAR(block_suboptimality_gap(ds, kSquared, 0.2, opt, block), 0.0, 1e-14);
  // No coordinate step within the block improves further.
  std::vector<double> bumped = opt;
  bumped[9] += 1e-3;
  EXPECT_LT(dual_value(ds, kSquared, 0.2, bumped), dual_value(ds, kSquared, 0.2, opt));
}

TEST(BlockGap, FullBlockIsGlobalGap) {
  const auto ds = testing::random_dataset(5, 25, false, 7);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> alpha(25);
  for (auto& a : alpha) a = n(rng);
  const auto opt = testing::ridge_dual_optimum(ds, 0.4);
  const double d_star = testing::dual_reference(ds, LossFamily::kSquaredError, 0.4, opt);
  EXPECT_NEAR(block_suboptimality_gap(ds, kSquared, 0.4, alpha, range(0, 25)),
              d_star - dual_value(ds, kSquared, 0.4, alpha), 1e-10);
}

TEST(BlockGap, MatchesDenseBlockSolve) {
  const auto ds = testing::random_dataset(3, 40, false, 8);
  const std::vector<std::size_t> block{0, 3, 7, 20, 33};
  std::vector<double> alpha(40, -0.1);
  // Dense oracle: maximize D over the block by the m_B x m_B normal equations
  //   (G/(lambda m) + I/2) a = y_B - X_B^T w_rest.
  const double lambda = 0.3, m = 40.0;
  std::vector<double> rest = alpha;
  for (const auto i : block) rest[i] = 0.0;
  const auto w_rest = primal_from_dual(ds, lambda, rest);
  Eigen::MatrixXd g(5, 5);
  Eigen::VectorXd b(5);
  for (int p = 0; p < 5; ++p) {
    const auto xp = ds.dense_column(block[p]);
    double xw = 0.0;
    for (std::size_t r = 0; r < 3; ++r) xw += xp[r] * w_rest[r];
    b(p) = ds.label(block[p]) - xw;
    for (int q = 0; q < 5; ++q) {
      const auto xq = ds.dense_column(block[q]);
      double s = 0.0;
      for (std::size_t r = 0; r < 3; ++r) s += xp[r] * xq[r];
      g(p, q) = s / (lambda * m) + (p == q ? 0.5 : 0.0);
    }
  }
  const Eigen::VectorXd a = g.ldlt().solve(b);
  const auto got = block_maximizer(ds, kSquared, lambda, alpha, block);
  for (int p = 0; p < 5; ++p) EXPECT_NEAR(got[block[p]], a(p), 1e-10);
}

TEST(BlockGap, HingeUnsupported) {
  const auto ds = testing::random_dataset(3, 10, true, 9);
  const std::vector<double> alpha(10, 0.0);
  EXPECT_THROW(block_suboptimality_gap(ds, LossSpec::hinge(), 1.0, alpha, range(0, 5)),
               Unsupported);
}

// Local SDCA on a block contracts the block gap in expectation by at least
// theta_p.
TEST(BlockGap, LocalSdcaContractsInExpectation) {
  const auto ds = testing::random_dataset(6, 60, false, 10);
  const double lambda = 0.5;
  const auto block = range(10, 30);
  std::mt19937_64 start_rng(3);
  std::normal_distribution<double> n;
  std::vector<double> alpha(60);
  for (auto& a : alpha) a = n(start_rng);
  const auto w = primal_from_dual(ds, lambda, alpha);
  const double before = block_suboptimality_gap(ds, kSquared, lambda, alpha, block);
  const int tp = 15;
  const double theta = theta_p(lambda, 60.0, 0.5, 20.0, tp);
  const int trials = 400;
  double sum = 0.0, sum2 = 0.0;
  for (int s = 0; s < trials; ++s) {
    auto rng = make_stream({static_cast<std::uint32_t>(s)});
    const auto d = local_sdca(ds, kSquared, lambda, block, alpha, w, tp, rng);
    std::vector<double> next = alpha;
    for (std::size_t j = 0; j < block.size(); ++j) next[block[j]] += d.delta_alpha[j];
    const double after = block_suboptimality_gap(ds, kSquared, lambda, next, block);
    EXPECT_LE(after, before + 1e-12);
    sum += after;
    sum2 += after * after;
  }
  const double mean = sum / trials;
  const double se = std::sqrt(std::max(0.0, sum2 / trials - mean * mean) / trials);
  EXPECT_LE(mean, theta * before + 3.0 * se);
}

// Measured per-root-iteration contraction of the expected dual
// sub-optimality on a small imbalanced ridge instance, next to the rate
// inputs for the same instance.
struct ContractionStudy {
  BoundInputs inputs;
  std::vector<double> mean_ratio;
  std::vector<double> std_error;
};

ContractionStudy contraction_study(double lambda, std::vector<double> fractions, int tp) {
  const std::size_t m = 40;
  const auto ds = testing::random_dataset(5, m, false, 11);
  const auto topo = Topology::build_tree(std::vector<int>{2});
  const auto part = partition_by_fractions(ds, fractions, topo.leaves(), 4);
  const auto betas = compute_betas(topo, part, WeightMode::kDataProportional);
  const auto sched = schedule_iterations(topo, part, std::vector<int>{3, tp});

  ContractionStudy study;
  const std::vector<std::vector<std::size_t>> blocks{part.block(NodeId{1}),
                                                     part.block(NodeId{2})};
  auto& in = study.inputs;
  in.lambda = lambda;
  in.m = static_cast<double>(m);
  in.gamma = 0.5;
  for (const auto& b : blocks) {
    in.thetas.push_back(theta_p(lambda, in.m, 0.5, static_cast<double>(b.size()), tp));
  }
  in.betas = betas.at(topo.root());
  in.rho = rho_min(ds, lambda, blocks);
  in.T = 1;

  const auto opt = testing::ridge_dual_optimum(ds, lambda);
  const double d_star = testing::dual_reference(ds, LossFamily::kSquaredError, lambda, opt);
  const int seeds = 200;
  std::vector<std::vector<double>> gaps(seeds);
  for (int s = 0; s < seeds; ++s) {
    TreeSolver solver(ds, kSquared, lambda, topo, part, betas, sched,
                      {static_cast<std::uint64_t>(s)});
    for (const auto& r : solver.run(TimeModel::uniform(1, 1, 0, 0))) {
      gaps[s].push_back(d_star - r.dual);
    }
  }
  for (std::size_t t = 0; t + 1 < gaps[0].size(); ++t) {
    double sum = 0.0, sum2 = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const double ratio = gaps[s][t + 1] / gaps[s][t];
      sum += ratio;
      sum2 += ratio * ratio;
    }
    const double mean = sum / seeds;
    study.mean_ratio.push_back(mean);
    study.std_error.push_back(std::sqrt(std::max(0.0, sum2 / seeds - mean * mean) / seeds));
  }
  return study;
}

// The convergence bound, exactly as defined, against the measured rate.
TEST(ConvergenceBound, HoldsEmpirically) {
  const auto study = contraction_study(1.0, {0.25, 0.75}, 10);
  const double bound = convergence_bound(study.inputs);
  for (std::size_t t = 0; t < study.mean_ratio.size(); ++t) {
    EXPECT_LE(study.mean_ratio[t], bound + 3.0 * study.std_error[t]) << "iteration " << t;
  }
}

// The rate obtained by chaining the per-child improvement through the
// separability constant: 1 - min_k (1 - theta_k) beta_k * c2.
TEST(ConvergenceBound, ChainedRateHoldsEmpirically) {
  for (const double lambda : {1.0, 0.1}) {
    for (const int tp : {10, 100}) {
      const auto study = contraction_study(lambda, {0.25, 0.75}, tp);
      const auto& in = study.inputs;
      double step = 1.0;
      for (std::size_t k = 0; k < in.thetas.size(); ++k) {
        step = std::min(step, (1.0 - in.thetas[k]) * in.betas[k]);
      }
      const double rate =
          1.0 - step * separability_constant(in.lambda, in.m, in.gamma, in.rho);
      for (std::size_t t = 0; t < study.mean_ratio.size(); ++t) {
        EXPECT_LE(study.mean_ratio[t], rate + 3.0 * study.std_error[t])
            << "lambda " << lambda << " T_p " << tp << " iteration " << t;
      }
    }
  }
}

}  // namespace
}  // namespace gdca
