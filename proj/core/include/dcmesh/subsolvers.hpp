#pragma once

#include <functional>

#include "dcmesh/problem.hpp"

namespace dcmesh {

/// Element-wise sign(v) * max(|v| - t, 0).
Vector soft_threshold(const Vector& v, double t);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration
/// (relative accuracy ~1e-8, at most 5000 iterations).
double lambda_max(const Matrix& m);

struct InnerReport {
  int iterations = 0;
  double residual = 0.0;  ///< last stopping-rule value (eps2 or eps1 metric)
  bool hit_cap = false;
};

/// Data of one agent's PDC-ADMM local problem
///
///   min_{x in S, r >= 0}  f(x) + c/(4|N_i|) || (E x - q/N)/c - p/c + s ||^2
///                              + 1/(2 tau) || C x + r - d + tau z ||^2
///
/// where s is the neighbor term: sum_j (y_i + y_j) from the previous round,
/// or 2 sum_j t_ij in the randomized variant. All members are views; the
/// referenced objects must outlive the subproblem.
struct QuadSubproblem {
  const AgentData& agent;
  double c;
  double tau;
  double degree;    ///< |N_i|
  double n_agents;  ///< N used in q/N
  const Vector& q;
  const Vector& p;
  const Vector& z;
  const Vector& neighbor_term;
  const Vector& x_start;
  const Vector& r_start;
};

/// Hessian of the smooth part of QuadSubproblem with respect to x,
///   (1/(2|N_i| c)) E^T E + (1/tau) C^T C,
/// and its largest eigenvalue. Depends only on (agent, c, tau, |N_i|), so
/// callers compute it once per run.
struct BsumCurvature {
  double lmax = 0.0;
};
BsumCurvature bsum_curvature(const AgentData& agent, double c, double tau,
                             double degree);

/// beta_i = beta_factor * lambda_max((1/(2|N_i| c)) E^T E + (1/tau) C^T C).
double bsum_beta(const AgentData& agent, double c, double tau, double degree,
                 double beta_factor);

double quad_subproblem_objective(const QuadSubproblem& sp, const Vector& x,
                                 const Vector& r);

struct BsumOptions {
  double eps2 = 1e-6;
  int max_inner = 5000;
  double beta_factor = 1.01;
  /// Called after every sweep with (sweep, x, r). Observation only.
  std::function<void(int, const Vector&, const Vector&)> on_sweep;
};

struct BsumResult {
  Vector x;
  Vector r;
  InnerReport report;
};

/// Block successive upper-bound minimization: alternates a linearized
/// proximal x-step (soft-thresholding for l1 costs) with the exact r-step
/// r = max(d - C x - tau z, 0), until
///   sqrt(||dx||^2 + ||dr||^2) / (K + P) <= eps2.
/// Warm-started from (x_start, r_start).
BsumResult bsum_solve(const QuadSubproblem& sp, const BsumOptions& opt,
                      const BsumCurvature* curvature = nullptr);

/// DC-ADMM local problem (constraint kept hard):
///
///   min_{x in S}  f(x) + c/(4|N_i|) || (E x - q/N)/c - p/c + s ||^2
///   s.t.          C x <= d
struct ConstrainedSubproblem {
  const AgentData& agent;
  double c;
  double degree;
  double n_agents;
  const Vector& q;
  const Vector& p;
  const Vector& neighbor_term;
  const Vector& x_start;
};

/// Splitting variables of the inner ADMM (s = C x, scaled dual w); kept
/// between calls for warm starts.
struct InnerAdmmState {
  Vector s;
  Vector w;
};

struct InnerAdmmOptions {
  double eps1 = 1e-6;
  double c1 = 5.0;
  int max_iters = 5000;
  /// Cap on proximal-gradient sweeps per x-update (nonsmooth costs).
  int max_x_sweeps = 500;
};

/// Per-run cache: Lipschitz constant of the x-update's smooth part and,
/// for quadratic costs over the full space, a Cholesky factor.
struct InnerAdmmWorkspace {
  double lipschitz = 0.0;
  bool direct = false;
  Eigen::LLT<Matrix> factor;
};
InnerAdmmWorkspace inner_admm_workspace(const AgentData& agent, double c,
                                        double degree, double c1);

struct InnerAdmmResult {
  Vector x;
  InnerAdmmState state;
  InnerReport report;
};

/// Two-block ADMM on (x, s) with s = C x and the indicator of {s <= d} on
/// s. Stops when ||C x - s|| / sqrt(P) + ||c1 C^T (s - s_prev)|| / sqrt(K)
/// <= eps1. `warm` may be empty (cold start from x_start).
InnerAdmmResult inner_admm_solve(const ConstrainedSubproblem& sp,
                                 const InnerAdmmOptions& opt,
                                 const InnerAdmmState& warm = {},
                                 const InnerAdmmWorkspace* workspace = nullptr);

double constrained_subproblem_objective(const ConstrainedSubproblem& sp,
                                        const Vector& x);

}  // namespace dcmesh
