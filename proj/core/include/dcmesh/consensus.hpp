#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dcmesh/graph.hpp"
#include "dcmesh/problem.hpp"

namespace dcmesh {

/// One agent's iterates. y is the agent's copy of the coupling dual, z the
/// polyhedra dual, p the aggregated edge dual sum_j (u_ij + v_ji).
/// DC-ADMM leaves r and z empty.
struct AgentState {
  Vector x;
  Vector r;
  Vector y;
  Vector z;
  Vector p;
};

using NetworkState = std::vector<AgentState>;

/// Zero iterates for every agent (x, r, y, z, p all zero).
NetworkState initial_state(const CoupledProblem& p);

struct SolverConfig {
  double c = 0.1;                    ///< consensus penalty
  double tau = 0.0;                  ///< proximal parameter; <= 0 means tau = c
  std::vector<double> tau_per_agent; ///< optional per-agent override

  // PDC-ADMM inner solver (BSUM)
  double eps2 = 1e-6;
  double beta_factor = 1.01;
  int max_bsum = 5000;

  // DC-ADMM inner solver (ADMM)
  double eps1 = 1e-6;
  double c1 = 5.0;
  int max_inner_admm = 5000;

  int max_outer = 1000;
  /// Keep iterating until at least this iteration even after the stop rule
  /// fires; the trace still reports the first stopping iteration.
  int min_outer = 0;
  double stop_tol = 1e-4;
  /// Stop-rule window: the rule uses the median over the trailing window.
  int stop_window = 1;

  std::uint64_t seed = 0;
  /// Track edge duals and check the structural identities every iteration.
  bool debug = false;
  /// Worker threads for per-agent updates (1 = sequential).
  int threads = 1;

  double tau_for(std::size_t agent) const;
  void validate(std::size_t n_agents) const;
};

/// Checks shared by all run loops: connected graph over all agents, every
/// agent with at least one neighbor, valid problem and configuration.
void check_run_inputs(const CoupledProblem& p, const Graph& g,
                      const SolverConfig& cfg);

/// Edge consensus value (y_i + y_j) / 2.
Vector edge_midpoint(const Vector& yi, const Vector& yj);

/// sum_{j in N_i} (y_i + y_j), accumulated in neighbor order.
Vector neighbor_sum(const NetworkState& s, const Graph& g, std::size_t i);

/// y_i^k = (1/(2|N_i|)) (s - p/c + (E_i x_i - q/N)/c), shared by all three
/// algorithms; `neighbor_term` is s.
Vector local_dual_update(const Vector& neighbor_term, const Vector& p_prev,
                         const Vector& ex, const Vector& q, double n_agents,
                         double c, double degree);

/// p_i + 2c sum_{j in N_i} (y_i - t_ij) with t_ij = (y_i + y_j)/2, i.e.
/// p_i + c sum_j (y_i - y_j), evaluated in the edge-midpoint form.
Vector edge_dual_update(std::size_t i, const NetworkState& s, const Graph& g,
                        double c);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace dcmesh
