#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dcmesh/consensus.hpp"
#include "dcmesh/diagnostics.hpp"
#include "dcmesh/pdc_admm.hpp"

namespace dcmesh {

/// Random agent activity: agent i is ON with probability alpha_i each
/// iteration; an edge between two ON agents fails independently with
/// probability p_e. An edge is therefore active with probability
/// alpha_i * alpha_j * (1 - p_e).
struct ActivityModel {
  std::vector<double> alpha;
  double p_e = 0.0;
  std::uint64_t seed = 0;

  static ActivityModel uniform(std::size_t n_agents, double alpha, double p_e,
                               std::uint64_t seed);

  double edge_probability(std::size_t i, std::size_t j) const;
  /// True when every agent is always ON and links never fail.
  bool deterministic() const;
  void validate(std::size_t n_agents) const;
};

/// Omega^k (active agents) and Psi^k (active edges, by edge id).
struct ActivitySample {
  std::vector<char> agent_active;
  std::vector<char> edge_active;

  std::size_t num_active_agents() const;
  std::size_t num_active_edges() const;
};

/// Draws the activity of iteration k. The stream is keyed by (seed, k) only,
/// so the sample does not depend on how agent updates are scheduled.
ActivitySample sample_activity(const ActivityModel& m, const Graph& g,
                               std::uint64_t k);

/// Agent iterates plus one shared t value per edge (t_ij == t_ji).
struct RandomizedState {
  NetworkState agents;
  std::vector<Vector> t;  ///< indexed by Graph edge id
};

/// Zero agent iterates and t_ij = (y_i + y_j) / 2.
RandomizedState initial_randomized_state(const CoupledProblem& p,
                                         const Graph& g);

struct RandomizedStep {
  RandomizedState state;
  IterationStats stats;
};

/// One iteration of randomized PDC-ADMM. Active agents run the local PDC
/// update with neighbor term 2 sum_j t_ij; then every active edge refreshes
/// t_ij = (y_i + y_j)/2 and active agents add 2c sum_{active j}(y_i - t_ij)
/// to p_i. Idle agents and inactive edges keep their values bitwise.
RandomizedStep rpdc_step(const RandomizedState& prev,
                         const ActivitySample& sample, const CoupledProblem& p,
                         const Graph& g, const SolverConfig& cfg,
                         const std::vector<BsumCurvature>* curvature = nullptr);

/// Randomized PDC-ADMM from zero iterates. Rows carry active agent/edge
/// counts; the stop rule uses cfg.stop_window.
ConvergenceTrace rpdc_run(const CoupledProblem& p, const Graph& g,
                          const SolverConfig& cfg, const ActivityModel& activity,
                          std::optional<double> obj_star = std::nullopt);

}  // namespace dcmesh
