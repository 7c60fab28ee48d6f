#pragma once

#include <optional>

#include "dcmesh/consensus.hpp"
#include "dcmesh/diagnostics.hpp"
#include "dcmesh/subsolvers.hpp"

namespace dcmesh {

struct AgentStepResult {
  AgentState state;
  InnerReport inner;
  double inner_seconds = 0.0;
};

/// Local part of a PDC-ADMM round for one agent given its neighbor term s:
/// (x, r) from BSUM, then the closed-form y and z updates. p is carried
/// over unchanged; it is updated after all y have been published.
AgentStepResult pdc_local_update(const AgentData& agent, const AgentState& prev,
                                 const Vector& neighbor_term, const Vector& q,
                                 double n_agents, double degree, double c,
                                 double tau, const BsumOptions& bsum,
                                 const BsumCurvature* curvature = nullptr);

/// Agent i's round from the previous-iteration snapshot, with neighbor term
/// sum_{j in N_i} (y_i + y_j).
AgentStepResult pdc_agent_step(std::size_t i, const NetworkState& prev,
                               const CoupledProblem& p, const Graph& g,
                               const SolverConfig& cfg,
                               const BsumCurvature* curvature = nullptr);

BsumOptions bsum_options(const SolverConfig& cfg);

/// Deterministic PDC-ADMM from zero initial iterates. Stops on
/// |Acc| + Feas <= stop_tol when obj_star is given, otherwise on the
/// residual rule, or after max_outer iterations.
ConvergenceTrace pdc_run(const CoupledProblem& p, const Graph& g,
                         const SolverConfig& cfg,
                         std::optional<double> obj_star = std::nullopt);

}  // namespace dcmesh
