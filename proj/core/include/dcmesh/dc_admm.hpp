#pragma once

#include <optional>

#include "dcmesh/consensus.hpp"
#include "dcmesh/diagnostics.hpp"
#include "dcmesh/pdc_admm.hpp"
#include "dcmesh/subsolvers.hpp"

namespace dcmesh {

InnerAdmmOptions inner_admm_options(const SolverConfig& cfg);

struct DcStepResult {
  AgentState state;  ///< x, y updated; r and z stay empty; p unchanged
  InnerAdmmState inner_state;
  InnerReport inner;
  double inner_seconds = 0.0;
};

/// Agent i's DC-ADMM round: x from the polyhedra-constrained subproblem
/// (inner ADMM, warm-started from `warm`), then the same y update as
/// PDC-ADMM. p is updated after the y barrier via edge_dual_update.
DcStepResult dc_agent_step(std::size_t i, const NetworkState& prev,
                           const CoupledProblem& p, const Graph& g,
                           const SolverConfig& cfg,
                           const InnerAdmmState& warm = {},
                           const InnerAdmmWorkspace* workspace = nullptr);

ConvergenceTrace dc_run(const CoupledProblem& p, const Graph& g,
                        const SolverConfig& cfg,
                        std::optional<double> obj_star = std::nullopt);

}  // namespace dcmesh
