#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcmesh/consensus.hpp"
#include "dcmesh/graph.hpp"
#include "dcmesh/problem.hpp"

namespace dcmesh {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One row per outer iteration.
struct TraceRow {
  int k = 0;
  double objective = 0.0;
  double acc = kNaN;             ///< signed; NaN without obj*
  double feas = 0.0;
  double coupling_norm = 0.0;    ///< ||sum_i E_i x_i - q||_2
  double consensus = 0.0;        ///< max over edges ||y_i - y_j||_2
  double sum_p_inf = 0.0;        ///< ||sum_i p_i||_inf
  double ergodic_objective = 0.0;
  double ergodic_gap = kNaN;     ///< NaN without obj*
  double inner_seconds = 0.0;    ///< summed over agents
  long inner_iterations = 0;     ///< summed over agents
  int inner_cap_hits = 0;
  int active_agents = 0;
  int active_edges = 0;
};

/// Worst values seen by the debug-mode structural checks. Every field is
/// observation only; enabling debug mode never changes the iterates.
struct InvariantReport {
  bool checked = false;
  /// max_k ||sum_i p_i||_inf / (1 + max_i ||p_i||_inf)
  double sum_p_ratio = 0.0;
  /// max_k max_edges ||u_ij + v_ij||_inf / (1 + ||u_ij||_inf)
  double uv_ratio = 0.0;
  /// max_k max_i ||p_i - sum_j (u_ij + v_ji)||_inf / (1 + ||p_i||_inf)
  double aggregation_ratio = 0.0;
  bool t_symmetric = true;
  bool x_in_set = true;
  bool r_nonnegative = true;
  bool idle_frozen = true;
  int iterations_checked = 0;
};

/// Per-iteration convergence record plus run metadata and end state.
struct ConvergenceTrace {
  std::string algorithm;
  std::vector<std::pair<std::string, std::string>> metadata;
  bool randomized = false;
  std::optional<double> obj_star;

  std::vector<TraceRow> rows;

  int stop_iteration = -1;  ///< first k at which the stop rule held
  bool converged = false;
  std::string stop_rule;    ///< "acc+feas" or "residual"
  double wall_seconds = 0.0;

  PrimalPoint last;
  PrimalPoint ergodic;  ///< running averages (1/M) sum_k (x^k, r^k)
  NetworkState final_state;
  InvariantReport invariants;

  double total_inner_seconds() const;
  double inner_seconds_through(int k) const;
  const TraceRow* row_at(int k) const;
};

struct IterationStats {
  double inner_seconds = 0.0;
  long inner_iterations = 0;
  int inner_cap_hits = 0;
  int active_agents = 0;
  int active_edges = 0;
};

/// Computes trace rows from solver snapshots and keeps the ergodic
/// averages incrementally: xbar^k = ((k-1) xbar^{k-1} + x^k) / k.
class TraceRecorder {
 public:
  TraceRecorder(const CoupledProblem& p, const Graph& g,
                std::optional<double> obj_star, ConvergenceTrace& trace);

  const TraceRow& record(const NetworkState& snapshot,
                         const IterationStats& stats);

 private:
  const CoupledProblem& problem_;
  const Graph& graph_;
  std::optional<double> obj_star_;
  ConvergenceTrace& trace_;
};

/// |F(x) - F*| + ||sum E x - q||_2 + sum_i ||C_i x_i + r_i - d_i||_2.
double ergodic_gap(const CoupledProblem& p, const PrimalPoint& avg,
                   double obj_star);

double consensus_residual(const NetworkState& s, const Graph& g);

PrimalPoint primal_of(const NetworkState& s);

struct RateCertificate {
  double sup = 0.0;     ///< max_M M * gap(M)
  double median = 0.0;  ///< median_M M * gap(M)
  int samples = 0;
};

/// Statistics of M * ergodic_gap(M) over rows with M in [m_lo, m_hi].
/// Needs obj* and at least m_lo rows.
RateCertificate rate_certificate(const ConvergenceTrace& trace, int m_lo = 50,
                                 int m_hi = 2000);

/// Stop rule evaluated on the trailing `window` rows:
///   with obj*:   median(|Acc| + Feas) <= tol
///   without:     median(consensus + coupling + Feas) <= tol
bool stop_rule_met(const ConvergenceTrace& trace, double tol, int window);

/// Edge duals u_ij, v_ij per directed neighbor slot, tracked only in debug
/// mode to check u_ij + v_ij = 0 and p_i = sum_j (u_ij + v_ji).
class EdgeDualDebug {
 public:
  EdgeDualDebug(const Graph& g, Index L);

  /// Applies u_ij += c (y_i - t_ij) and v_ji += c (y_i - t_ji) for each
  /// active neighbor slot of agent i; `t` holds t_ij per edge id.
  void update(std::size_t i, const NetworkState& s,
              const std::vector<Vector>& t, double c,
              const std::vector<char>* active_edges = nullptr);

  /// Returns (uv_ratio, aggregation_ratio) for the current state.
  std::pair<double, double> check(const NetworkState& s) const;

 private:
  std::size_t slot_of(std::size_t i, std::size_t j) const;
  const Graph& graph_;
  std::vector<std::vector<Vector>> u_;  // u_[i][slot] = u_ij
  std::vector<std::vector<Vector>> v_;  // v_[i][slot] = v_ij
};

/// Folds per-iteration invariant checks (sum p, set membership, r >= 0)
/// into the report.
void check_state_invariants(const CoupledProblem& p, const NetworkState& s,
                            InvariantReport& report);

}  // namespace dcmesh
