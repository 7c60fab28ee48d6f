#include <gtest/gtest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "dcmesh/subsolvers.hpp"
#include "oracles.hpp"

using namespace dcmesh;

namespace {

Vector randn(std::mt19937_64& rng, Index n, double s = 1.0) {
  std::normal_distribution<double> nd(0.0, s);
  Vector v(n);
  for (Index j = 0; j < n; ++j) v(j) = nd(rng);
  return v;
}

Matrix randm(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

// Owns everything a QuadSubproblem / ConstrainedSubproblem points at.
struct Fixture {
  AgentData agent;
  Vector q, p, z, s, x0, r0;
  double c = 0.5, tau = 0.5, degree = 2.0, n = 3.0;

  QuadSubproblem quad() const {
    return {agent, c, tau, degree, n, q, p, z, s, x0, r0};
  }
  ConstrainedSubproblem constrained() const {
    return {agent, c, degree, n, q, p, s, x0};
  }
};

Fixture lasso_fixture(std::uint64_t seed, Index K = 8, Index L = 5, Index P = 4) {
  std::mt19937_64 rng(seed);
  Fixture f;
  f.agent.E = randm(rng, L, K);
  f.agent.C = randm(rng, P, K);
  f.agent.d = randn(rng, P).cwiseAbs();
  f.agent.cost = CostFn::l1(0.3);
  f.q = randn(rng, L);
  f.p = randn(rng, L);
  f.z = randn(rng, P).cwiseAbs();
  f.s = randn(rng, L);
  f.x0 = Vector::Zero(K);
  f.r0 = Vector::Zero(P);
  return f;
}

}  // namespace

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(Vector{{3.0, -0.5, 0.0}}, 1.0), (Vector{{2.0, 0.0, 0.0}}));
  const Vector v{{1.5, -2.0, 0.25}};
  EXPECT_EQ(soft_threshold(v, 0.0), v);
}

TEST(SoftThreshold, MatchesGridSearch) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const Vector v = randn(rng, 4, 2.0);
    const double t = ut(rng);
    const Vector ref = ref::grid_soft_threshold(v, t);
    EXPECT_LE((soft_threshold(v, t) - ref).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(SoftThreshold, OddAndNonexpansive) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    const Vector a = randn(rng, 6, 2.0), b = randn(rng, 6, 2.0);
    EXPECT_EQ(soft_threshold(-a, 0.7), -soft_threshold(a, 0.7));
    EXPECT_LE((soft_threshold(a, 0.7) - soft_threshold(b, 0.7)).norm(),
              (a - b).norm() + 1e-12);
  }
}

TEST(LambdaMax, Examples) {
  EXPECT_NEAR(lambda_max(Matrix::Identity(3, 3)), 1.0, 1e-8);
  EXPECT_NEAR(lambda_max(Vector{{1.0, 4.0, 9.0}}.asDiagonal().toDenseMatrix()), 9.0, 9e-8);
  EXPECT_EQ(lambda_max(Matrix::Zero(3, 3)), 0.0);
  EXPECT_THROW(lambda_max(Matrix::Zero(2, 3)), Error);
}

TEST(LambdaMax, MatchesEigensolver) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const Matrix a = randm(rng, 12, 10);
    const Matrix g = a.transpose() * a;
    const double ref =
        Eigen::SelfAdjointEigenSolver<Matrix>(g, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    EXPECT_NEAR(lambda_max(g), ref, 1e-6 * ref);
  }
}

TEST(Bsum, UnconstrainedMatchesNormalEquations) {
  std::mt19937_64 rng(2);
  Fixture f;
  f.agent.E = randm(rng, 3, 3) + 3.0 * Matrix::Identity(3, 3);
  f.agent.C = Matrix::Zero(0, 3);
  f.agent.d = Vector::Zero(0);
  f.agent.cost = CostFn::zero();
  f.q = randn(rng, 3);
  f.p = randn(rng, 3);
  f.s = randn(rng, 3);
  f.z = Vector::Zero(0);
  f.x0 = Vector::Zero(3);
  f.r0 = Vector::Zero(0);
  // minimizer of ||E x - a||^2 with a = q/N + p - c s
  const Vector a = f.q / f.n + f.p - f.c * f.s;
  const Matrix& E = f.agent.E;
  const Vector ref = (E.transpose() * E).ldlt().solve(E.transpose() * a);
  BsumOptions opt;
  opt.eps2 = 1e-14;
  opt.max_inner = 200000;
  const auto res = bsum_solve(f.quad(), opt);
  EXPECT_FALSE(res.report.hit_cap);
  EXPECT_LE((res.x - ref).norm(), 1e-8 * (1 + ref.norm()));
}

TEST(Bsum, WarmStartAtOptimumStopsQuickly) {
  Fixture f = lasso_fixture(5);
  BsumOptions opt;
  opt.eps2 = 1e-13;
  opt.max_inner = 200000;
  const auto first = bsum_solve(f.quad(), opt);
  f.x0 = first.x;
  f.r0 = first.r;
  opt.eps2 = 1e-6;
  const auto again = bsum_solve(f.quad(), opt);
  EXPECT_LE(again.report.iterations, 2);
  EXPECT_LE(again.report.residual, 1e-6);
}

TEST(Bsum, BetaScalesCurvature) {
  const Fixture f = lasso_fixture(7);
  const Matrix H = (1.0 / (2.0 * f.degree * f.c)) * f.agent.E.transpose() * f.agent.E +
                   (1.0 / f.tau) * f.agent.C.transpose() * f.agent.C;
  const double ref =
      Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  EXPECT_NEAR(bsum_beta(f.agent, f.c, f.tau, f.degree, 0.4), 0.4 * ref, 1e-7 * ref);
  EXPECT_NEAR(bsum_curvature(f.agent, f.c, f.tau, f.degree).lmax, ref, 1e-7 * ref);
}

TEST(Bsum, MonotonePerSweepAndFeasibleIterates) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Fixture f = lasso_fixture(100 + seed, 10, 6, 5);
    f.agent.set = seed % 2 ? SimpleSet::nonnegative() : SimpleSet::full_space();
    const QuadSubproblem sp = f.quad();
    double prev = quad_subproblem_objective(sp, f.x0, f.r0);
    int bad = 0;
    BsumOptions opt;
    opt.eps2 = 1e-10;
    opt.beta_factor = 1.01;
    opt.on_sweep = [&](int, const Vector& x, const Vector& r) {
      const double v = quad_subproblem_objective(sp, x, r);
      if (v > prev + 1e-12 * (1 + std::abs(prev))) ++bad;
      prev = v;
      if (r.size() && r.minCoeff() < 0) ++bad;
      if (!f.agent.set.contains(x)) ++bad;
    };
    const auto res = bsum_solve(sp, opt);
    EXPECT_EQ(bad, 0) << "seed " << seed;
    EXPECT_GE(res.r.minCoeff(), 0.0);
  }
}

TEST(Bsum, CapIsReported) {
  const Fixture f = lasso_fixture(8);
  BsumOptions opt;
  opt.eps2 = 1e-30;
  opt.max_inner = 3;
  const auto res = bsum_solve(f.quad(), opt);
  EXPECT_TRUE(res.report.hit_cap);
  EXPECT_EQ(res.report.iterations, 3);
}

TEST(InnerAdmm, InactiveRowsMatchBsum) {
  Fixture f = lasso_fixture(11);
  f.agent.d = Vector::Constant(f.agent.P(), 1e6);
  f.z.setZero();
  f.r0 = f.agent.d;  // consistent slack at x0 = 0
  BsumOptions bo;
  bo.eps2 = 1e-14;
  bo.max_inner = 500000;
  const auto ref = bsum_solve(f.quad(), bo);
  InnerAdmmOptions io;
  io.eps1 = 1e-11;
  io.max_iters = 100000;
  io.max_x_sweeps = 100000;
  const auto got = inner_admm_solve(f.constrained(), io);
  EXPECT_LE((got.x - ref.x).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(InnerAdmm, BindingSingleRow) {
  Fixture f;
  f.agent.E = Matrix::Ones(1, 1);
  f.agent.C = Matrix::Ones(1, 1);
  f.agent.d = Vector::Zero(1);
  f.agent.cost = CostFn::zero();
  f.c = 0.5;
  f.degree = 1.0;
  f.n = 1.0;
  f.q = Vector::Ones(1);  // centre of the quadratic at x = 1
  f.p = Vector::Zero(1);
  f.s = Vector::Zero(1);
  f.x0 = Vector::Zero(1);
  InnerAdmmOptions io;
  io.eps1 = 1e-10;
  io.max_iters = 100000;
  const auto got = inner_admm_solve(f.constrained(), io);
  EXPECT_NEAR(got.x(0), 0.0, 1e-6);
}

TEST(InnerAdmm, DefaultParametersAndRowViolation) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Fixture f = lasso_fixture(40 + seed);
    InnerAdmmOptions io;
    io.c1 = 5.0;
    io.eps1 = 1e-6;
    const auto got = inner_admm_solve(f.constrained(), io);
    EXPECT_FALSE(got.report.hit_cap);
    const double viol = std::max((f.agent.C * got.x - f.agent.d).maxCoeff(), 0.0);
    EXPECT_LE(viol, 10 * io.eps1) << "seed " << seed;
  }
}

TEST(InnerAdmm, QuadraticDirectPath) {
  std::mt19937_64 rng(6);
  Fixture f;
  f.agent.E = randm(rng, 4, 3);
  f.agent.C = randm(rng, 2, 3);
  f.agent.d = Vector::Constant(2, 1e6);
  f.agent.cost = CostFn::squared_l2();
  f.q = randn(rng, 4);
  f.p = randn(rng, 4);
  f.s = randn(rng, 4);
  f.z = Vector::Zero(2);
  f.x0 = Vector::Zero(3);
  f.r0 = Vector::Zero(2);
  const auto ws = inner_admm_workspace(f.agent, f.c, f.degree, 5.0);
  EXPECT_TRUE(ws.direct);
  // x^2 + ||E x - a||^2 / (4 |N| c)
  const Vector a = f.q / f.n + f.p - f.c * f.s;
  const double w = 1.0 / (4.0 * f.degree * f.c);
  const Matrix& E = f.agent.E;
  const Vector ref = (2.0 * Matrix::Identity(3, 3) + 2.0 * w * E.transpose() * E)
                         .ldlt()
                         .solve(2.0 * w * E.transpose() * a);
  InnerAdmmOptions io;
  io.eps1 = 1e-12;
  io.max_iters = 100000;
  const auto got = inner_admm_solve(f.constrained(), io, {}, &ws);
  EXPECT_LE((got.x - ref).norm(), 1e-8);
}
