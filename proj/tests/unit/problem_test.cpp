#include <gtest/gtest.h>

#include <random>

#include "dcmesh/problem.hpp"
#include "oracles.hpp"

using namespace dcmesh;

namespace {

Vector randn(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(n);
  for (Index j = 0; j < n; ++j) v(j) = nd(rng);
  return v;
}

CoupledProblem single_agent(const Matrix& C, const Vector& d, CostFn f) {
  CoupledProblem p;
  p.L = 1;
  p.q = Vector::Zero(1);
  AgentData a;
  a.E = Matrix::Ones(1, C.cols());
  a.C = C;
  a.d = d;
  a.cost = f;
  p.agents.push_back(a);
  return p;
}

double prox_objective(const CostFn& f, const Vector& x, const Vector& v,
                      double beta) {
  return f.value(x) + 0.5 * beta * (x - v).squaredNorm();
}

}  // namespace

TEST(Objective, ZeroPoint) {
  const auto p = make_constrained_lasso({3, 5, 4, 2, 1.0}, 1);
  EXPECT_EQ(objective(p, PrimalPoint::zeros(p)), 0.0);
}

TEST(Objective, L1Example) {
  auto p = single_agent(Matrix::Zero(0, 2), Vector::Zero(0), CostFn::l1(2.0));
  PrimalPoint pt = PrimalPoint::zeros(p);
  pt.x[0] = Vector{{1.0, -3.0}};
  EXPECT_DOUBLE_EQ(objective(p, pt), 8.0);
}

TEST(Objective, MatchesScalarLoop) {
  std::mt19937_64 rng(5);
  const auto p = make_constrained_lasso({4, 6, 3, 2, 0.7}, 9);
  PrimalPoint pt = PrimalPoint::zeros(p);
  for (auto& x : pt.x) x = randn(rng, x.size());
  EXPECT_NEAR(objective(p, pt), ref::loop_objective(p, pt), 1e-12);
}

TEST(Coupling, Examples) {
  const auto toy = ref::toy_least_norm();
  PrimalPoint pt = PrimalPoint::zeros(toy);
  pt.x[0](0) = 1.0;
  pt.x[1](0) = 1.0;
  EXPECT_EQ(coupling_residual(toy, pt)(0), 0.0);

  std::mt19937_64 rng(2);
  const auto p = make_constrained_lasso({3, 4, 5, 2, 1.0}, 4);
  for (auto& x : pt.x) x.setZero();
  PrimalPoint rp = PrimalPoint::zeros(p);
  for (auto& x : rp.x) x = randn(rng, x.size());
  const Vector res = coupling_residual(p, rp);
  const auto ref = ref::loop_coupling(p, rp);
  for (Index l = 0; l < p.L; ++l) EXPECT_NEAR(res(l), ref[l], 1e-12);
}

TEST(Feas, Examples) {
  auto p = single_agent(Matrix::Ones(1, 1), Vector::Zero(1), CostFn::zero());
  PrimalPoint pt = PrimalPoint::zeros(p);
  EXPECT_EQ(feas_metric(p, pt), 0.0);
  pt.x[0](0) = 2.0;
  EXPECT_DOUBLE_EQ(feas_metric(p, pt), 2.0);
  EXPECT_DOUBLE_EQ(max_row_violation(p, pt), 2.0);

  std::mt19937_64 rng(8);
  const auto q = make_constrained_lasso({3, 4, 5, 6, 1.0}, 11);
  PrimalPoint rp = PrimalPoint::zeros(q);
  for (auto& x : rp.x) x = randn(rng, x.size(), 2.0);
  EXPECT_NEAR(feas_metric(q, rp), ref::loop_feas(q, rp), 1e-12);
}

TEST(Feas, NoRowsIsZero) {
  const auto toy = ref::toy_least_norm();
  PrimalPoint pt = PrimalPoint::zeros(toy);
  pt.x[0](0) = 5.0;
  EXPECT_EQ(feas_metric(toy, pt), 0.0);
}

TEST(Acc, Examples) {
  EXPECT_EQ(acc_metric(3.0, 3.0), 0.0);
  EXPECT_NEAR(acc_metric(1.1, 1.0), 0.1, 1e-15);
  EXPECT_LT(acc_metric(0.9, 1.0), 0.0);
  EXPECT_THROW(acc_metric(1.0, 0.0), Error);
}

TEST(Problem, ValidateCatchesMismatch) {
  auto p = ref::toy_least_norm();
  p.agents[1].E = Matrix::Ones(2, 1);
  EXPECT_THROW(p.validate(), Error);
  auto q = ref::toy_least_norm();
  PrimalPoint bad = PrimalPoint::zeros(q);
  bad.x[0] = Vector::Zero(3);
  EXPECT_THROW(objective(q, bad), Error);
}

TEST(Lasso, FullScaleInstance) {
  const auto p = make_constrained_lasso({50, 500, 100, 250, 10.0}, 0);
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.num_agents(), 51u);
  EXPECT_EQ(p.L, 100);
  EXPECT_EQ(p.total_K(), 100 + 50 * 500);
  EXPECT_EQ(p.total_P(), 50 * 250);
}

TEST(Lasso, StructureAndWitness) {
  PrimalPoint w;
  const auto p = make_constrained_lasso({5, 8, 6, 4, 0.5}, 3, &w);
  const auto& slack = p.agents[0];
  EXPECT_EQ(slack.cost.kind(), CostFn::Kind::SquaredL2);
  EXPECT_EQ(slack.P(), 0);
  EXPECT_TRUE(slack.E.isApprox(-Matrix::Identity(6, 6)));
  for (std::size_t i = 1; i < p.num_agents(); ++i) {
    EXPECT_EQ(p.agents[i].cost, CostFn::l1(0.5));
    const Vector slackv = p.agents[i].d - p.agents[i].C * w.x[i];
    EXPECT_GT(slackv.minCoeff(), 0.0);
  }
  EXPECT_LE(coupling_residual(p, w).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(feas_metric(p, w), 0.0);
}

TEST(Lasso, Deterministic) {
  const auto a = make_constrained_lasso({3, 5, 4, 2, 1.0}, 77);
  const auto b = make_constrained_lasso({3, 5, 4, 2, 1.0}, 77);
  for (std::size_t i = 0; i < a.num_agents(); ++i) {
    EXPECT_EQ(a.agents[i].E, b.agents[i].E);
    EXPECT_EQ(a.agents[i].C, b.agents[i].C);
    EXPECT_EQ(a.agents[i].d, b.agents[i].d);
  }
  EXPECT_EQ(a.q, b.q);
}

TEST(Lasso, RejectsBadDims) {
  EXPECT_THROW(make_constrained_lasso({0, 5, 4, 2, 1.0}, 1), Error);
  EXPECT_THROW(make_constrained_lasso({2, 5, 4, 2, 0.0}, 1), Error);
  EXPECT_THROW(make_constrained_lasso({2, 0, 4, 2, 1.0}, 1), Error);
}

TEST(LoadControl, BalancedWitness) {
  PrimalPoint w;
  const auto p = make_load_control({6, 5, 4, 6}, 12, &w);
  EXPECT_EQ(p.num_agents(), 7u);
  EXPECT_EQ(p.agents[0].cost.kind(), CostFn::Kind::SquaredL2);
  for (std::size_t i = 1; i < p.num_agents(); ++i) {
    EXPECT_EQ(p.agents[i].cost.kind(), CostFn::Kind::Zero);
    EXPECT_GE((p.agents[i].d - p.agents[i].C * w.x[i]).minCoeff(), 0.0);
  }
  EXPECT_EQ(objective(p, w), 0.0);
  EXPECT_LE(coupling_residual(p, w).cwiseAbs().maxCoeff(), 1e-12);
  const auto again = make_load_control({6, 5, 4, 6}, 12);
  for (std::size_t i = 0; i < p.num_agents(); ++i)
    EXPECT_EQ(p.agents[i].C, again.agents[i].C);
  EXPECT_THROW(make_load_control({0, 5, 4, 6}, 1), Error);
}

TEST(Prox, BeatsRandomPerturbations) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  const CostFn fns[] = {CostFn::l1(0.8), CostFn::squared_l2(), CostFn::l2_norm(),
                        CostFn::zero()};
  for (const auto& f : fns) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vector v = randn(rng, 6, 2.0);
      const double beta = 0.3 + std::abs(nd(rng));
      const Vector x = f.prox(v, beta);
      const double best = prox_objective(f, x, v, beta);
      for (int k = 0; k < 1000; ++k) {
        const Vector cand = x + randn(rng, 6, 1e-2 * (1 + k % 7));
        EXPECT_LE(best, prox_objective(f, cand, v, beta) + 1e-12) << f.name();
      }
    }
  }
}

TEST(Prox, Nonexpansive) {
  std::mt19937_64 rng(4);
  const CostFn fns[] = {CostFn::l1(1.3), CostFn::squared_l2(), CostFn::l2_norm(),
                        CostFn::zero()};
  for (const auto& f : fns)
    for (int k = 0; k < 200; ++k) {
      const Vector a = randn(rng, 5, 3.0), b = randn(rng, 5, 3.0);
      EXPECT_LE((f.prox(a, 0.7) - f.prox(b, 0.7)).norm(), (a - b).norm() + 1e-12);
    }
}

TEST(Prox, OnSetBeatsPerturbationsInsideSet) {
  std::mt19937_64 rng(13);
  const SimpleSet box = SimpleSet::box(Vector::Constant(4, -0.5), Vector::Constant(4, 1.0));
  const SimpleSet sets[] = {SimpleSet::nonnegative(), box};
  const CostFn fns[] = {CostFn::l1(0.4), CostFn::squared_l2(), CostFn::zero()};
  for (const auto& s : sets)
    for (const auto& f : fns) {
      const Vector v = randn(rng, 4, 2.0);
      const Vector x = prox_on_set(f, s, v, 1.5);
      ASSERT_TRUE(s.contains(x));
      const double best = prox_objective(f, x, v, 1.5);
      for (int k = 0; k < 1000; ++k) {
        const Vector cand = s.project(x + randn(rng, 4, 0.05));
        EXPECT_LE(best, prox_objective(f, cand, v, 1.5) + 1e-12);
      }
    }
  // l2 norm over the orthant
  for (int k = 0; k < 20; ++k) {
    const Vector v = randn(rng, 4, 2.0);
    const Vector x = prox_on_set(CostFn::l2_norm(), SimpleSet::nonnegative(), v, 1.0);
    ASSERT_TRUE(SimpleSet::nonnegative().contains(x));
    const double best = prox_objective(CostFn::l2_norm(), x, v, 1.0);
    for (int t = 0; t < 500; ++t) {
      const Vector cand = SimpleSet::nonnegative().project(x + randn(rng, 4, 0.05));
      EXPECT_LE(best, prox_objective(CostFn::l2_norm(), cand, v, 1.0) + 1e-12);
    }
  }
}

TEST(Project, ClosestAmongRandomMembers) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const Vector lo{{-1.0, 0.0, -INFINITY}}, hi{{1.0, 2.0, 0.5}};
  const SimpleSet sets[] = {SimpleSet::full_space(), SimpleSet::nonnegative(),
                            SimpleSet::box(lo, hi)};
  for (const auto& s : sets) {
    const Vector v = randn(rng, 3, 2.0);
    const Vector p = s.project(v);
    ASSERT_TRUE(s.contains(p));
    EXPECT_EQ(s.project(p), p);
    const double d = (p - v).norm();
    for (int k = 0; k < 10000; ++k) {
      Vector m(3);
      for (Index j = 0; j < 3; ++j) m(j) = u(rng);
      m = s.project(m);  // a random member
      EXPECT_LE(d, (m - v).norm() + 1e-12);
    }
  }
}

TEST(Project, BoxValidation) {
  EXPECT_THROW(SimpleSet::box(Vector::Ones(2), Vector::Zero(2)), Error);
  EXPECT_THROW(SimpleSet::box(Vector::Ones(2), Vector::Ones(3)), Error);
}
