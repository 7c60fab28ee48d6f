#pragma once

// Shared bookkeeping for the three outer loops. Not installed.

#include <string>
#include <utility>
#include <vector>

#include "dcmesh/consensus.hpp"
#include "dcmesh/diagnostics.hpp"
#include "dcmesh/format.hpp"
#include "dcmesh/subsolvers.hpp"

namespace dcmesh::detail {

inline std::vector<std::pair<std::string, std::string>> common_metadata(
    const SolverConfig& cfg, const Graph& g) {
  return {{"c", format_double(cfg.c)},
          {"tau", format_double(cfg.tau > 0.0 ? cfg.tau : cfg.c)},
          {"max_outer", std::to_string(cfg.max_outer)},
          {"stop_tol", format_double(cfg.stop_tol)},
          {"seed", std::to_string(cfg.seed)},
          {"agents", std::to_string(g.num_nodes())},
          {"edges", std::to_string(g.num_edges())}};
}

inline void accumulate(IterationStats& stats, const InnerReport& r,
                       double seconds) {
  stats.inner_seconds += seconds;
  stats.inner_iterations += r.iterations;
  stats.inner_cap_hits += r.hit_cap ? 1 : 0;
}

/// Updates the stop bookkeeping after row k; true when the loop should end.
inline bool advance_stop(ConvergenceTrace& trace, const SolverConfig& cfg,
                         int k) {
  if (trace.stop_iteration < 0 &&
      stop_rule_met(trace, cfg.stop_tol, cfg.stop_window)) {
    trace.stop_iteration = k;
    trace.converged = true;
  }
  return trace.converged && k >= cfg.min_outer;
}

/// Debug-mode observer: materializes t_ij and the edge duals alongside the
/// solver and folds every structural check into the trace's report.
class DebugTracker {
 public:
  DebugTracker(const Graph& g, Index L)
      : duals_(g, L), t_(g.num_edges(), Vector::Zero(L)) {}

  /// Deterministic round: every edge refreshes t_ij = (y_i + y_j)/2.
  void after_full_round(const CoupledProblem& p, const Graph& g,
                        const NetworkState& s, double c,
                        InvariantReport& report) {
    const auto& edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [i, j] = edges[e];
      t_[e] = edge_midpoint(s[i].y, s[j].y);
      if (t_[e] != edge_midpoint(s[j].y, s[i].y)) report.t_symmetric = false;
    }
    for (std::size_t i = 0; i < g.num_nodes(); ++i) duals_.update(i, s, t_, c);
    fold(p, s, report);
  }

  /// Randomized round with the solver's own t values and active edge mask.
  void after_partial_round(const CoupledProblem& p, const Graph& g,
                           const NetworkState& s, const std::vector<Vector>& t,
                           const std::vector<char>& active_agents,
                           const std::vector<char>& active_edges, double c,
                           InvariantReport& report) {
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      if (active_agents[i]) duals_.update(i, s, t, c, &active_edges);
    fold(p, s, report);
  }

 private:
  void fold(const CoupledProblem& p, const NetworkState& s,
            InvariantReport& report) {
    check_state_invariants(p, s, report);
    const auto [uv, agg] = duals_.check(s);
    report.uv_ratio = std::max(report.uv_ratio, uv);
    report.aggregation_ratio = std::max(report.aggregation_ratio, agg);
  }

  EdgeDualDebug duals_;
  std::vector<Vector> t_;
};

}  // namespace dcmesh::detail
