#include "dcmesh/dc_admm.hpp"

#include <chrono>

#include "run_support.hpp"

namespace dcmesh {

InnerAdmmOptions inner_admm_options(const SolverConfig& cfg) {
  InnerAdmmOptions o;
  o.eps1 = cfg.eps1;
  o.c1 = cfg.c1;
  o.max_iters = cfg.max_inner_admm;
  return o;
}

DcStepResult dc_agent_step(std::size_t i, const NetworkState& prev,
                           const CoupledProblem& p, const Graph& g,
                           const SolverConfig& cfg, const InnerAdmmState& warm,
                           const InnerAdmmWorkspace* workspace) {
  require(i < p.num_agents() && prev.size() == p.num_agents(),
          "agent index or snapshot size mismatch");
  require(g.degree(i) >= 1, "agent " + std::to_string(i) + " has no neighbors");
  const auto& agent = p.agents[i];
  const AgentState& mine = prev[i];
  const Vector s = neighbor_sum(prev, g, i);
  const double n_agents = static_cast<double>(p.num_agents());
  const double degree = static_cast<double>(g.degree(i));

  const ConstrainedSubproblem sp{agent, cfg.c, degree, n_agents,
                                 p.q,   mine.p, s,     mine.x};
  const auto t0 = std::chrono::steady_clock::now();
  InnerAdmmResult solved = inner_admm_solve(sp, inner_admm_options(cfg), warm,
                                            workspace);
  const auto t1 = std::chrono::steady_clock::now();

  DcStepResult out;
  out.inner = solved.report;
  out.inner_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.inner_state = std::move(solved.state);
  out.state.x = std::move(solved.x);
  out.state.y = local_dual_update(s, mine.p, agent.E * out.state.x, p.q,
                                  n_agents, cfg.c, degree);
  out.state.p = mine.p;
  return out;
}

ConvergenceTrace dc_run(const CoupledProblem& p, const Graph& g,
                        const SolverConfig& cfg,
                        std::optional<double> obj_star) {
  check_run_inputs(p, g, cfg);
  const std::size_t n = p.num_agents();
  const auto start = std::chrono::steady_clock::now();

  ConvergenceTrace trace;
  trace.algorithm = "dc";
  trace.metadata = detail::common_metadata(cfg, g);
  trace.metadata.emplace_back("eps1", format_double(cfg.eps1));
  trace.metadata.emplace_back("c1", format_double(cfg.c1));
  trace.stop_rule = obj_star ? "acc+feas" : "residual";

  std::vector<InnerAdmmWorkspace> ws(n);
  for (std::size_t i = 0; i < n; ++i)
    ws[i] = inner_admm_workspace(p.agents[i], cfg.c,
                                 static_cast<double>(g.degree(i)), cfg.c1);

  NetworkState state = initial_state(p);
  for (auto& a : state) {
    a.r.resize(0);
    a.z.resize(0);
  }
  TraceRecorder recorder(p, g, obj_star, trace);
  std::optional<detail::DebugTracker> debug;
  if (cfg.debug) debug.emplace(g, p.L);

  std::vector<InnerAdmmState> warm(n);
  std::vector<DcStepResult> step(n);
  std::vector<Vector> p_next(n);
  for (int k = 1; k <= cfg.max_outer; ++k) {
    parallel_for(n, cfg.threads, [&](std::size_t i) {
      step[i] = dc_agent_step(i, state, p, g, cfg, warm[i], &ws[i]);
    });
    NetworkState next(n);
    IterationStats stats;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = std::move(step[i].state);
      warm[i] = std::move(step[i].inner_state);
      detail::accumulate(stats, step[i].inner, step[i].inner_seconds);
    }
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
