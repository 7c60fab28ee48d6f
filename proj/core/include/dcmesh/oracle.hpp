#pragma once

#include <vector>

#include "dcmesh/problem.hpp"

namespace dcmesh {

/// Primal-dual point of the slack form
///   min sum f_i(x_i)  s.t.  sum E_i x_i = q,  C_i x_i + r_i = d_i,
///   r_i >= 0,  x_i in S_i
/// with y the coupling dual and z_i the polyhedra duals.
struct KktPoint {
  PrimalPoint primal;
  Vector y;
  std::vector<Vector> z;
};

struct OracleOptions {
  double tol = 1e-9;
  long max_iters = 1000000;
  int check_every = 50;
  /// Active-set polishing starts once the first-order residual is below this.
  double polish_below = 1e-4;
};

struct OracleResult {
  KktPoint point;
  double obj_star = 0.0;
  double kkt = 0.0;
  long iterations = 0;
  bool converged = false;  ///< false: cap hit above tol, not a ground truth
  bool polished = false;
};

/// Centralized reference solve: diagonally preconditioned Chambolle-Pock on
/// the saddle form with all constraints dualized, plus an active-set Newton
/// polish of the KKT system.
OracleResult reference_solve(const CoupledProblem& p,
                             const OracleOptions& opt = {});

/// Sum of dimension-normalized stationarity, coupling residual, polyhedra
/// and set violation, dual feasibility and complementarity. Zero iff the
/// point satisfies KKT exactly.
double kkt_residual(const CoupledProblem& p, const KktPoint& pt);

}  // namespace dcmesh
