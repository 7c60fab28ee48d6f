#include "dcmesh/randomized.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <random>

#include "dcmesh/format.hpp"
#include "run_support.hpp"

namespace dcmesh {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::equal(a.data(), a.data() + a.size(), b.data(), [](double u, double v) {
           return std::memcmp(&u, &v, sizeof(double)) == 0;
         });
}

bool bitwise_equal(const AgentState& a, const AgentState& b) {
  return bitwise_equal(a.x, b.x) && bitwise_equal(a.r, b.r) &&
         bitwise_equal(a.y, b.y) && bitwise_equal(a.z, b.z) &&
         bitwise_equal(a.p, b.p);
}

}  // namespace

ActivityModel ActivityModel::uniform(std::size_t n_agents, double alpha,
                                     double p_e, std::uint64_t seed) {
  ActivityModel m;
  m.alpha.assign(n_agents, alpha);
  m.p_e = p_e;
  m.seed = seed;
  m.validate(n_agents);
  return m;
}

double ActivityModel::edge_probability(std::size_t i, std::size_t j) const {
  return alpha.at(i) * alpha.at(j) * (1.0 - p_e);
}

bool ActivityModel::deterministic() const {
  if (p_e != 0.0) return false;
  for (double a : alpha)
    if (a != 1.0) return false;
  return true;
}

void ActivityModel::validate(std::size_t n_agents) const {
  require(alpha.size() == n_agents, "activity model needs one alpha per agent");
  for (double a : alpha) require(a > 0.0 && a <= 1.0, "alpha must lie in (0, 1]");
  require(p_e >= 0.0 && p_e <= 1.0, "p_e must lie in [0, 1]");
}

std::size_t ActivitySample::num_active_agents() const {
  return static_cast<std::size_t>(std::count(agent_active.begin(), agent_active.end(), 1));
}

std::size_t ActivitySample::num_active_edges() const {
  return static_cast<std::size_t>(std::count(edge_active.begin(), edge_active.end(), 1));
}

ActivitySample sample_activity(const ActivityModel& m, const Graph& g,
                               std::uint64_t k) {
  m.validate(g.num_nodes());
  std::mt19937_64 rng(splitmix64(m.seed ^ splitmix64(k)));
  ActivitySample s;
  s.agent_active.resize(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    s.agent_active[i] = std::bernoulli_distribution(m.alpha[i])(rng) ? 1 : 0;
  // One draw per edge regardless of endpoint activity keeps the stream
  // layout fixed.
  std::bernoulli_distribution link_ok(1.0 - m.p_e);
  const auto& edges = g.edges();
  s.edge_active.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const bool ok = link_ok(rng);
    s.edge_active[e] =
        (ok && s.agent_active[edges[e].first] && s.agent_active[edges[e].second]) ? 1 : 0;
  }
  return s;
}

RandomizedState initial_randomized_state(const CoupledProblem& p,
                                         const Graph& g) {
  RandomizedState s;
  s.agents = initial_state(p);
  s.t.reserve(g.num_edges());
  for (auto [i, j] : g.edges())
    s.t.push_back(edge_midpoint(s.agents[i].y, s.agents[j].y));
  return s;
}

RandomizedStep rpdc_step(const RandomizedState& prev,
                         const ActivitySample& sample, const CoupledProblem& p,
                         const Graph& g, const SolverConfig& cfg,
                         const std::vector<BsumCurvature>* curvature) {
  const std::size_t n = p.num_agents();
  require(prev.agents.size() == n && prev.t.size() == g.num_edges(),
          "randomized state does not match problem/graph");
  require(sample.agent_active.size() == n &&
              sample.edge_active.size() == g.num_edges(),
          "activity sample does not match graph");
  const double n_agents = static_cast<double>(n);
  const BsumOptions bsum = bsum_options(cfg);

  RandomizedStep out{prev, {}};
  std::vector<AgentStepResult> step(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    if (!sample.agent_active[i]) return;
    Vector s = Vector::Zero(p.L);
    for (std::size_t e : g.incident_edges(i)) s += 2.0 * prev.t[e];
    step[i] = pdc_local_update(
        p.agents[i], prev.agents[i], s, p.q, n_agents,
        static_cast<double>(g.degree(i)), cfg.c, cfg.tau_for(i), bsum,
        curvature ? &(*curvature)[i] : nullptr);
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!sample.agent_active[i]) continue;
    out.state.agents[i] = std::move(step[i].state);
    detail::accumulate(out.stats, step[i].inner, step[i].inner_seconds);
  }

  const auto& edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!sample.edge_active[e]) continue;
    const auto [i, j] = edges[e];
    out.state.t[e] = edge_midpoint(out.state.agents[i].y, out.state.agents[j].y);
  }
  std::vector<Vector> p_next(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    if (!sample.agent_active[i]) return;
    const AgentState& a = out.state.agents[i];
    Vector acc = Vector::Zero(p.L);
    for (std::size_t e : g.incident_edges(i))
      if (sample.edge_active[e]) acc += a.y - out.state.t[e];
    p_next[i] = a.p + (2.0 * cfg.c) * acc;
  });
  for (std::size_t i = 0; i < n; ++i)
    if (sample.agent_active[i]) out.state.agents[i].p = std::move(p_next[i]);

  out.stats.active_agents = static_cast<int>(sample.num_active_agents());
  out.stats.active_edges = static_cast<int>(sample.num_active_edges());
  return out;
}

ConvergenceTrace rpdc_run(const CoupledProblem& p, const Graph& g,
                          const SolverConfig& cfg, const ActivityModel& activity,
                          std::optional<double> obj_star) {
  check_run_inputs(p, g, cfg);
  activity.validate(p.num_agents());
  const std::size_t n = p.num_agents();
  const auto start = std::chrono::steady_clock::now();

  ConvergenceTrace trace;
  trace.algorithm = "rpdc";
  trace.randomized = true;
  trace.metadata = detail::common_metadata(cfg, g);
  trace.metadata.emplace_back("eps2", format_double(cfg.eps2));
  trace.metadata.emplace_back("beta_factor", format_double(cfg.beta_factor));
  trace.metadata.emplace_back("alpha", activity.alpha.empty()
                                           ? std::string("-")
                                           : format_double(activity.alpha.front()));
  trace.metadata.emplace_back("p_e", format_double(activity.p_e));
  trace.metadata.emplace_back("activity_seed", std::to_string(activity.seed));
  trace.stop_rule = obj_star ? "acc+feas" : "residual";

  std::vector<BsumCurvature> curv(n);
  for (std::size_t i = 0; i < n; ++i)
    curv[i] = bsum_curvature(p.agents[i], cfg.c, cfg.tau_for(i),
                             static_cast<double>(g.degree(i)));

  RandomizedState state = initial_randomized_state(p, g);
  TraceRecorder recorder(p, g, obj_star, trace);
  std::optional<detail::DebugTracker> debug;
  if (cfg.debug) debug.emplace(g, p.L);

  for (int k = 1; k <= cfg.max_outer; ++k) {
    const ActivitySample sample =
        sample_activity(activity, g, static_cast<std::uint64_t>(k));
    RandomizedStep step = rpdc_step(state, sample, p, g, cfg, &curv);

    if (debug) {
      auto& inv = trace.invariants;
      for (std::size_t i = 0; i < n; ++i)
        if (!sample.agent_active[i] &&
            !bitwise_equal(state.agents[i], step.state.agents[i]))
          inv.idle_frozen = false;
      for (std::size_t e = 0; e < g.num_edges(); ++e)
        if (!sample.edge_active[e] && !bitwise_equal(state.t[e], step.state.t[e]))
          inv.idle_frozen = false;
      debug->after_partial_round(p, g, step.state.agents, step.state.t,
                                 sample.agent_active, sample.edge_active, cfg.c,
                                 inv);
    }
    state = std::move(step.state);
    recorder.record(state.agents, step.stats);
    if (detail::advance_stop(trace, cfg, k)) break;
  }
  trace.final_state = std::move(state.agents);
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace dcmesh
