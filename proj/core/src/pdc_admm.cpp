#include "dcmesh/pdc_admm.hpp"

#include <chrono>

#include "dcmesh/format.hpp"
#include "run_support.hpp"

namespace dcmesh {

BsumOptions bsum_options(const SolverConfig& cfg) {
  BsumOptions o;
  o.eps2 = cfg.eps2;
  o.max_inner = cfg.max_bsum;
  o.beta_factor = cfg.beta_factor;
  return o;
}

AgentStepResult pdc_local_update(const AgentData& agent, const AgentState& prev,
                                 const Vector& neighbor_term, const Vector& q,
                                 double n_agents, double degree, double c,
                                 double tau, const BsumOptions& bsum,
                                 const BsumCurvature* curvature) {
  const QuadSubproblem sp{agent,   c,      tau,          degree, n_agents, q,
                          prev.p,  prev.z, neighbor_term, prev.x, prev.r};
  const auto t0 = std::chrono::steady_clock::now();
  BsumResult solved = bsum_solve(sp, bsum, curvature);
  const auto t1 = std::chrono::steady_clock::now();

  AgentStepResult out;
  out.inner = solved.report;
  out.inner_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.state.x = std::move(solved.x);
  out.state.r = std::move(solved.r);
  out.state.y = local_dual_update(neighbor_term, prev.p, agent.E * out.state.x,
                                  q, n_agents, c, degree);
  if (agent.P() > 0)
    out.state.z = prev.z + (agent.C * out.state.x + out.state.r - agent.d) / tau;
  else
    out.state.z = prev.z;
  out.state.p = prev.p;
  return out;
}

AgentStepResult pdc_agent_step(std::size_t i, const NetworkState& prev,
                               const CoupledProblem& p, const Graph& g,
                               const SolverConfig& cfg,
                               const BsumCurvature* curvature) {
  require(i < p.num_agents() && prev.size() == p.num_agents(),
          "agent index or snapshot size mismatch");
  require(g.degree(i) >= 1, "agent " + std::to_string(i) + " has no neighbors");
  return pdc_local_update(p.agents[i], prev[i], neighbor_sum(prev, g, i), p.q,
                          static_cast<double>(p.num_agents()),
                          static_cast<double>(g.degree(i)), cfg.c,
                          cfg.tau_for(i), bsum_options(cfg), curvature);
}

ConvergenceTrace pdc_run(const CoupledProblem& p, const Graph& g,
                         const SolverConfig& cfg,
                         std::optional<double> obj_star) {
  check_run_inputs(p, g, cfg);
  const std::size_t n = p.num_agents();
  const auto start = std::chrono::steady_clock::now();

  ConvergenceTrace trace;
  trace.algorithm = "pdc";
  trace.metadata = detail::common_metadata(cfg, g);
  trace.metadata.emplace_back("eps2", format_double(cfg.eps2));
  trace.metadata.emplace_back("beta_factor", format_double(cfg.beta_factor));
  trace.stop_rule = obj_star ? "acc+feas" : "residual";

  std::vector<BsumCurvature> curv(n);
  for (std::size_t i = 0; i < n; ++i)
    curv[i] = bsum_curvature(p.agents[i], cfg.c, cfg.tau_for(i),
                             static_cast<double>(g.degree(i)));

  NetworkState state = initial_state(p);
  TraceRecorder recorder(p, g, obj_star, trace);
  std::optional<detail::DebugTracker> debug;
  if (cfg.debug) debug.emplace(g, p.L);

  std::vector<AgentStepResult> step(n);
  std::vector<Vector> p_next(n);
  for (int k = 1; k <= cfg.max_outer; ++k) {
    parallel_for(n, cfg.threads, [&](std::size_t i) {
      step[i] = pdc_agent_step(i, state, p, g, cfg, &curv[i]);
    });
    NetworkState next(n);
    IterationStats stats;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = std::move(step[i].state);
      detail::accumulate(stats, step[i].inner, step[i].inner_seconds);
    }
    // y^k published; dual aggregates use current neighbor values.
    parallel_for(n, cfg.threads, [&](std::size_t i) {
      p_next[i] = edge_dual_update(i, next, g, cfg.c);
    });
    for (std::size_t i = 0; i < n; ++i) next[i].p = std::move(p_next[i]);
    stats.active_agents = static_cast<int>(n);
    stats.active_edges = static_cast<int>(g.num_edges());

    if (debug) debug->after_full_round(p, g, next, cfg.c, trace.invariants);
    state = std::move(next);
    recorder.record(state, stats);
    if (detail::advance_stop(trace, cfg, k)) break;
  }
  trace.final_state = std::move(state);
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace dcmesh
