#include "dcmesh/subsolvers.hpp"

#include <algorithm>
#include <cmath>

namespace dcmesh {

Vector soft_threshold(const Vector& v, double t) {
  require(t >= 0.0, "soft_threshold needs t >= 0");
  return v.unaryExpr([t](double a) {
    return std::copysign(std::max(std::abs(a) - t, 0.0), a);
  });
}

double lambda_max(const Matrix& m) {
  require(m.rows() == m.cols(), "lambda_max needs a square matrix");
  const Index n = m.rows();
  if (n == 0) return 0.0;
  constexpr int kCap = 5000;
  constexpr double kResidualTol = 1e-7;

  // Deterministic start with no special alignment to structured matrices.
  Vector v(n);
  for (Index k = 0; k < n; ++k) v(k) = 1.0 + 0.5 * std::sin(1.0 + 0.7 * k);
  v.normalize();
  double lambda = 0.0;
  Vector mv(n);
  for (int it = 0; it < kCap; ++it) {
    mv.noalias() = m * v;
    lambda = v.dot(mv);
    const double norm = mv.norm();
    if (norm == 0.0) return 0.0;
    if ((mv - lambda * v).norm() <= kResidualTol * std::abs(lambda)) break;
    v = mv / norm;
  }
  return lambda;
}

// ------------------------------------------------------------------ BSUM

namespace {

// a = q/N + p - c s, so that the consensus term reads (1/(4|N|c))||E x - a||^2.
Vector consensus_target(const Vector& q, double n_agents, const Vector& p,
                        double c, const Vector& s) {
  return q / n_agents + p - c * s;
}

Matrix bsum_hessian(const AgentData& a, double c, double tau, double degree) {
  Matrix h = (1.0 / (2.0 * degree * c)) * (a.E.transpose() * a.E);
  if (a.P() > 0) h.noalias() += (1.0 / tau) * (a.C.transpose() * a.C);
  return h;
}

}  // namespace

BsumCurvature bsum_curvature(const AgentData& agent, double c, double tau,
                             double degree) {
  require(c > 0.0 && tau > 0.0 && degree >= 1.0, "invalid BSUM parameters");
  return BsumCurvature{lambda_max(bsum_hessian(agent, c, tau, degree))};
}

double bsum_beta(const AgentData& agent, double c, double tau, double degree,
                 double beta_factor) {
  return beta_factor * bsum_curvature(agent, c, tau, degree).lmax;
}

double quad_subproblem_objective(const QuadSubproblem& sp, const Vector& x,
                                 const Vector& r) {
  const auto& a = sp.agent;
  const Vector target =
      consensus_target(sp.q, sp.n_agents, sp.p, sp.c, sp.neighbor_term);
  double val = a.cost.value(x) +
               (a.E * x - target).squaredNorm() / (4.0 * sp.degree * sp.c);
  if (a.P() > 0)
    val += (a.C * x + r - a.d + sp.tau * sp.z).squaredNorm() / (2.0 * sp.tau);
  return val;
}

BsumResult bsum_solve(const QuadSubproblem& sp, const BsumOptions& opt,
                      const BsumCurvature* curvature) {
  require(opt.eps2 > 0.0 && opt.beta_factor > 0.0 && opt.max_inner >= 1,
          "invalid BSUM options");
  require(sp.c > 0.0 && sp.tau > 0.0 && sp.degree >= 1.0,
          "invalid BSUM subproblem parameters");
  const auto& a = sp.agent;
  const Index K = a.K();
  const Index P = a.P();
  require(sp.x_start.size() == K && sp.r_start.size() == P,
          "BSUM warm start has wrong dimension");

  const double lmax = curvature
                          ? curvature->lmax
                          : bsum_curvature(a, sp.c, sp.tau, sp.degree).lmax;
  // A zero Hessian (E = 0, P = 0) still needs a positive step.
  const double beta = opt.beta_factor * std::max(lmax, 1e-12);

  const Vector target =
      consensus_target(sp.q, sp.n_agents, sp.p, sp.c, sp.neighbor_term);
  const Vector r_target = P > 0 ? Vector(a.d - sp.tau * sp.z) : Vector(0);
  const double e_scale = 1.0 / (2.0 * sp.degree * sp.c);
  const double denom = static_cast<double>(K + P);

  BsumResult out{sp.x_start, sp.r_start, {}};
  Vector grad(K);
  Vector cx(P);
  for (int sweep = 1; sweep <= opt.max_inner; ++sweep) {
    grad.noalias() = e_scale * (a.E.transpose() * (a.E * out.x - target));
    if (P > 0) {
      cx.noalias() = a.C * out.x;
      grad.noalias() += (1.0 / sp.tau) * (a.C.transpose() * (cx + out.r - r_target));
    }
    Vector x_new = prox_on_set(a.cost, a.set, out.x - grad / beta, beta);
    Vector r_new(P);
    if (P > 0) {
      cx.noalias() = a.C * x_new;
      r_new = (r_target - cx).cwiseMax(0.0);
    }
    const double step = std::sqrt((x_new - out.x).squaredNorm() +
                                  (r_new - out.r).squaredNorm()) /
                        denom;
    out.x = std::move(x_new);
    out.r = std::move(r_new);
    out.report.iterations = sweep;
    out.report.residual = step;
    if (opt.on_sweep) opt.on_sweep(sweep, out.x, out.r);
    if (step <= opt.eps2) return out;
  }
  out.report.hit_cap = true;
  return out;
}

// ------------------------------------------------------------ inner ADMM

double constrained_subproblem_objective(const ConstrainedSubproblem& sp,
                                        const Vector& x) {
  const Vector target =
      consensus_target(sp.q, sp.n_agents, sp.p, sp.c, sp.neighbor_term);
  return sp.agent.cost.value(x) +
         (sp.agent.E * x - target).squaredNorm() / (4.0 * sp.degree * sp.c);
}

InnerAdmmWorkspace inner_admm_workspace(const AgentData& agent, double c,
                                        double degree, double c1) {
  require(c > 0.0 && c1 > 0.0 && degree >= 1.0, "invalid inner ADMM parameters");
  InnerAdmmWorkspace ws;
  Matrix m = (1.0 / (2.0 * degree * c)) * (agent.E.transpose() * agent.E);
  if (agent.P() > 0) m.noalias() += c1 * (agent.C.transpose() * agent.C);
  ws.lipschitz = lambda_max(m);

  const auto kind = agent.cost.kind();
  const bool quadratic =
      kind == CostFn::Kind::Zero || kind == CostFn::Kind::SquaredL2;
  if (quadratic && agent.set.kind() == SimpleSet::Kind::FullSpace) {
    if (kind == CostFn::Kind::SquaredL2)
      m.diagonal().array() += 2.0;
    ws.factor.compute(m);
    ws.direct = ws.factor.info() == Eigen::Success && ws.factor.rcond() > 1e-12;
  }
  return ws;
}

namespace {

// argmin_{x in S} f(x) + (1/(4|N|c))||E x - target||^2 + (c1/2)||C x - v||^2
// with v = s - w.
Vector admm_x_update(const ConstrainedSubproblem& sp, const Vector& target,
                     const Vector& v, double c1, const InnerAdmmWorkspace& ws,
                     const Vector& x_warm, double xtol, int max_sweeps) {
  const auto& a = sp.agent;
  const double e_scale = 1.0 / (2.0 * sp.degree * sp.c);
  const bool has_rows = a.P() > 0;

  if (ws.direct) {
    Vector rhs = e_scale * (a.E.transpose() * target);
    if (has_rows) rhs.noalias() += c1 * (a.C.transpose() * v);
    return ws.factor.solve(rhs);
  }

  // FISTA with adaptive restart.
  const double lip = std::max(ws.lipschitz, 1e-12);
  auto gradient = [&](const Vector& x) {
    Vector g = e_scale * (a.E.transpose() * (a.E * x - target));
    if (has_rows) g.noalias() += c1 * (a.C.transpose() * (a.C * x - v));
    return g;
  };
  Vector x = x_warm;
  Vector y = x;
  double t = 1.0;
  for (int it = 0; it < max_sweeps; ++it) {
    Vector x_new = prox_on_set(a.cost, a.set, y - gradient(y) / lip, lip);
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vector dx = x_new - x;
    if ((y - x_new).dot(dx) > 0.0) {
      y = x_new;
      t = 1.0;
    } else {
      y = x_new + ((t - 1.0) / t_new) * dx;
      t = t_new;
    }
    x = std::move(x_new);
    if (dx.norm() <= xtol) break;
  }
  return x;
}

}  // namespace

InnerAdmmResult inner_admm_solve(const ConstrainedSubproblem& sp,
                                 const InnerAdmmOptions& opt,
                                 const InnerAdmmState& warm,
                                 const InnerAdmmWorkspace* workspace) {
  require(opt.eps1 > 0.0 && opt.c1 > 0.0 && opt.max_iters >= 1,
          "invalid inner ADMM options");
  require(sp.c > 0.0 && sp.degree >= 1.0, "invalid constrained subproblem");
  const auto& a = sp.agent;
  const Index K = a.K();
  const Index P = a.P();
  require(sp.x_start.size() == K, "inner ADMM warm start has wrong dimension");

  InnerAdmmWorkspace local;
  if (!workspace) {
    local = inner_admm_workspace(a, sp.c, sp.degree, opt.c1);
    workspace = &local;
  }
  const Vector target =
      consensus_target(sp.q, sp.n_agents, sp.p, sp.c, sp.neighbor_term);
  const double xtol = 0.01 * opt.eps1 * std::sqrt(static_cast<double>(K));

  InnerAdmmResult out;
  if (P == 0) {
    out.x = admm_x_update(sp, target, Vector(0), opt.c1, *workspace, sp.x_start,
                          xtol, 100 * opt.max_x_sweeps);
    out.report.iterations = 1;
    return out;
  }

  Vector x = sp.x_start;
  Vector s, w;
  if (warm.s.size() == P && warm.w.size() == P) {
    s = warm.s;
    w = warm.w;
  } else {
    s = (a.C * x).cwiseMin(a.d);
    w = Vector::Zero(P);
  }
  const double sqrtP = std::sqrt(static_cast<double>(P));
  const double sqrtK = std::sqrt(static_cast<double>(K));
  Vector cx(P);
  for (int it = 1; it <= opt.max_iters; ++it) {
    x = admm_x_update(sp, target, s - w, opt.c1, *workspace, x, xtol,
                      opt.max_x_sweeps);
    cx.noalias() = a.C * x;
    const Vector s_prev = s;
    s = (cx + w).cwiseMin(a.d);
    w += cx - s;
    const double primal = (cx - s).norm() / sqrtP;
    const double dual = opt.c1 * (a.C.transpose() * (s - s_prev)).norm() / sqrtK;
    out.report.iterations = it;
    out.report.residual = primal + dual;
    if (out.report.residual <= opt.eps1) {
      out.x = std::move(x);
      out.state = {std::move(s), std::move(w)};
      return out;
    }
  }
  out.report.hit_cap = true;
  out.x = std::move(x);
  out.state = {std::move(s), std::move(w)};
  return out;
}

}  // namespace dcmesh
