#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "dcmesh/oracle.hpp"
#include "dcmesh/pdc_admm.hpp"
#include "dcmesh/randomized.hpp"
#include "dcmesh/trace_io.hpp"
#include "oracles.hpp"

using namespace dcmesh;

namespace {

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool same_bits(const AgentState& a, const AgentState& b) {
  return same_bits(a.x, b.x) && same_bits(a.r, b.r) && same_bits(a.y, b.y) &&
         same_bits(a.z, b.z) && same_bits(a.p, b.p);
}

RandomizedState scrambled_state(const CoupledProblem& p, const Graph& g,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  RandomizedState s = initial_randomized_state(p, g);
  for (auto& a : s.agents) {
    for (Index j = 0; j < a.y.size(); ++j) a.y(j) = nd(rng);
    for (Index j = 0; j < a.z.size(); ++j) a.z(j) = std::abs(nd(rng));
  }
  // p from consistent edge duals keeps sum p = 0
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edges()[e];
    Vector u(p.L);
    for (Index l = 0; l < p.L; ++l) u(l) = nd(rng);
    s.agents[i].p += u;
    s.agents[j].p -= u;
    s.t[e] = edge_midpoint(s.agents[i].y, s.agents[j].y);
  }
  return s;
}

SolverConfig base_cfg() {
  SolverConfig cfg;
  cfg.c = 0.5;
  return cfg;
}

}  // namespace

TEST(Activity, FullActivity) {
  const Graph g = random_connected_graph(8, 0.5, 1);
  const auto m = ActivityModel::uniform(8, 1.0, 0.0, 3);
  EXPECT_TRUE(m.deterministic());
  for (std::uint64_t k = 1; k < 50; ++k) {
    const auto s = sample_activity(m, g, k);
    EXPECT_EQ(s.num_active_agents(), 8u);
    EXPECT_EQ(s.num_active_edges(), g.num_edges());
  }
}

TEST(Activity, AllLinksFail) {
  const Graph g = Graph::complete(6);
  const auto m = ActivityModel::uniform(6, 0.8, 1.0, 3);
  for (std::uint64_t k = 1; k < 50; ++k)
    EXPECT_EQ(sample_activity(m, g, k).num_active_edges(), 0u);
}

TEST(Activity, EdgeFrequencyMatchesBeta) {
  const Graph g = Graph::path(3);
  const auto m = ActivityModel::uniform(3, 0.7, 0.5, 42);
  const double beta = m.edge_probability(0, 1);
  EXPECT_NEAR(beta, 0.245, 1e-15);
  const int n = 100000;
  long hits = 0;
  for (int k = 1; k <= n; ++k) {
    const auto s = sample_activity(m, g, static_cast<std::uint64_t>(k));
    hits += s.edge_active[0];
    // psi only holds edges between active agents
    for (std::size_t e = 0; e < g.num_edges(); ++e)
      if (s.edge_active[e]) {
        EXPECT_TRUE(s.agent_active[g.edges()[e].first]);
        EXPECT_TRUE(s.agent_active[g.edges()[e].second]);
      }
  }
  const double sigma = std::sqrt(beta * (1 - beta) / n);
  EXPECT_NEAR(static_cast<double>(hits) / n, beta, 3 * sigma);
}

TEST(Activity, KeyedBySeedAndIteration) {
  const Graph g = random_connected_graph(10, 0.4, 2);
  const auto m = ActivityModel::uniform(10, 0.6, 0.3, 9);
  const auto a = sample_activity(m, g, 17);
  const auto b = sample_activity(m, g, 17);
  EXPECT_EQ(a.agent_active, b.agent_active);
  EXPECT_EQ(a.edge_active, b.edge_active);
  bool differs = false;
  for (std::uint64_t k = 18; k < 30; ++k)
    differs |= sample_activity(m, g, k).agent_active != a.agent_active;
  EXPECT_TRUE(differs);
}

TEST(Activity, Validation) {
  EXPECT_THROW(ActivityModel::uniform(3, 0.0, 0.1, 0), Error);
  EXPECT_THROW(ActivityModel::uniform(3, 1.1, 0.1, 0), Error);
  EXPECT_THROW(ActivityModel::uniform(3, 0.5, -0.1, 0), Error);
  const auto m = ActivityModel::uniform(3, 0.5, 0.1, 0);
  EXPECT_THROW(sample_activity(m, Graph::complete(4), 1), Error);
}

TEST(RpdcStep, NobodyActive) {
  const auto p = make_constrained_lasso({4, 5, 3, 2, 1.0}, 2);
  const Graph g = random_connected_graph(p.num_agents(), 0.6, 2);
  const auto prev = scrambled_state(p, g, 4);
  ActivitySample none;
  none.agent_active.assign(p.num_agents(), 0);
  none.edge_active.assign(g.num_edges(), 0);
  const auto out = rpdc_step(prev, none, p, g, base_cfg());
  for (std::size_t i = 0; i < p.num_agents(); ++i)
    EXPECT_TRUE(same_bits(out.state.agents[i], prev.agents[i]));
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    EXPECT_TRUE(same_bits(out.state.t[e], prev.t[e]));
}

TEST(RpdcStep, FullActivityEqualsDeterministicRound) {
  const auto p = make_constrained_lasso({4, 5, 3, 2, 1.0}, 5);
  const Graph g = random_connected_graph(p.num_agents(), 0.6, 5);
  const auto prev = scrambled_state(p, g, 6);
  const SolverConfig cfg = base_cfg();
  ActivitySample all;
  all.agent_active.assign(p.num_agents(), 1);
  all.edge_active.assign(g.num_edges(), 1);
  const auto out = rpdc_step(prev, all, p, g, cfg);

  NetworkState det(p.num_agents());
  for (std::size_t i = 0; i < p.num_agents(); ++i)
    det[i] = pdc_agent_step(i, prev.agents, p, g, cfg).state;
  std::vector<Vector> pn(p.num_agents());
  for (std::size_t i = 0; i < p.num_agents(); ++i)
    pn[i] = edge_dual_update(i, det, g, cfg.c);
  for (std::size_t i = 0; i < p.num_agents(); ++i) {
    det[i].p = pn[i];
    EXPECT_TRUE(same_bits(out.state.agents[i], det[i])) << "agent " << i;
  }
}

TEST(RpdcStep, IsolatedActiveAgentKeepsDualAndEdges) {
  const auto p = make_constrained_lasso({3, 4, 3, 2, 1.0}, 7);
  const Graph g = Graph::complete(p.num_agents());
  const auto prev = scrambled_state(p, g, 8);
  ActivitySample s;
  s.agent_active.assign(p.num_agents(), 0);
  s.agent_active[1] = 1;
  s.edge_active.assign(g.num_edges(), 0);
  const auto out = rpdc_step(prev, s, p, g, base_cfg());
  EXPECT_TRUE(same_bits(out.state.agents[1].p, prev.agents[1].p));
  EXPECT_FALSE(same_bits(out.state.agents[1].x, prev.agents[1].x));
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    EXPECT_TRUE(same_bits(out.state.t[e], prev.t[e]));
}

TEST(RpdcRun, ReducesToPdc) {
  const auto p = make_constrained_lasso({5, 6, 4, 3, 1.0}, 12);
  const Graph g = random_connected_graph(p.num_agents(), 0.5, 12);
  SolverConfig cfg = base_cfg();
  cfg.max_outer = 60;
  const auto det = pdc_run(p, g, cfg);
  const auto rnd = rpdc_run(p, g, cfg, ActivityModel::uniform(p.num_agents(), 1, 0, 3));
  CsvOptions opt;
  opt.timing = false;
  const std::string a = trace_to_csv(det, opt);
  std::string b = trace_to_csv(rnd, opt);
  ASSERT_EQ(det.rows.size(), rnd.rows.size());
  for (const auto& r : rnd.rows) {
    EXPECT_EQ(r.active_agents, static_cast<int>(p.num_agents()));
    EXPECT_EQ(r.active_edges, static_cast<int>(g.num_edges()));
  }
  // drop the two activity columns and compare the rest byte for byte
  std::string stripped;
  std::size_t pos = 0;
  while (pos < b.size()) {
    const std::size_t end = b.find("\r\n", pos);
    std::string line = b.substr(pos, end - pos);
    for (int c = 0; c < 2; ++c) line.erase(line.rfind(','));
    stripped += line + "\r\n";
    pos = end + 2;
  }
  EXPECT_EQ(stripped, a);
}

TEST(RpdcRun, IdleAgentsFrozenAndInvariantsHold) {
  const auto p = make_constrained_lasso({5, 6, 4, 3, 1.0}, 13);
  const Graph g = random_connected_graph(p.num_agents(), 0.5, 13);
  SolverConfig cfg = base_cfg();
  cfg.max_outer = 200;
  cfg.debug = true;
  const auto t = rpdc_run(p, g, cfg, ActivityModel::uniform(p.num_agents(), 0.7, 0.5, 1));
  const auto& inv = t.invariants;
  EXPECT_TRUE(inv.idle_frozen);
  EXPECT_TRUE(inv.x_in_set && inv.r_nonnegative);
  EXPECT_LE(inv.sum_p_ratio, 1e-9);
  EXPECT_LE(inv.aggregation_ratio, 1e-9);
  bool partial = false;
  for (const auto& r : t.rows) partial |= r.active_agents < static_cast<int>(p.num_agents());
  EXPECT_TRUE(partial);
}

TEST(RpdcRun, MeanTerminalAccuracyOverSeeds) {
  const auto p = ref::tiny_lasso(3);
  const auto orc = reference_solve(p);
  ASSERT_TRUE(orc.converged);
  const Graph g = Graph::complete(p.num_agents());
  SolverConfig cfg = base_cfg();
  cfg.max_outer = 3000;
  cfg.stop_window = 10;
  double total = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto t = rpdc_run(p, g, cfg, ActivityModel::uniform(p.num_agents(), 0.7, 0.5, s),
                            orc.obj_star);
    total += std::abs(t.rows.back().acc) + t.rows.back().feas;
  }
  EXPECT_LE(total / 20.0, 1e-3);
}
