#include "dcmesh/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "dcmesh/subsolvers.hpp"

namespace dcmesh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rms(double sq_sum, Index dim) {
  return dim > 0 ? std::sqrt(sq_sum / static_cast<double>(dim)) : 0.0;
}

// Subdifferential interval of f + indicator(S) at coordinate j (separable
// costs only).
std::pair<double, double> subgradient_interval(const AgentData& a,
                                               const Vector& x, Index j) {
  double lo = 0.0, hi = 0.0;
  switch (a.cost.kind()) {
    case CostFn::Kind::L1: {
      const double w = a.cost.weight();
      if (x(j) > 0) lo = hi = w;
      else if (x(j) < 0) lo = hi = -w;
      else { lo = -w; hi = w; }
      break;
    }
    case CostFn::Kind::SquaredL2:
      lo = hi = 2.0 * x(j);
      break;
    default:
      break;
  }
  const double lb = a.set.lower_bound(j), ub = a.set.upper_bound(j);
  if (x(j) <= lb) lo = -kInf;
  if (x(j) >= ub) hi = kInf;
  return {lo, hi};
}

struct Layout {
  std::vector<Index> row_off;  // polyhedra row offset per agent
  Index rows = 0;              // L + sum P
};

Layout layout_of(const CoupledProblem& p) {
  Layout l;
  Index off = p.L;
  for (const auto& a : p.agents) {
    l.row_off.push_back(off);
    off += a.P();
  }
  l.rows = off;
  return l;
}

// Stacked operator norm estimate of Sigma^{1/2} K T^{1/2}.
double preconditioned_norm(const CoupledProblem& p, const Layout& lay,
                           const Vector& sig, const std::vector<double>& tau_x,
                           const std::vector<Vector>& tau_r) {
  Index cols = 0;
  for (const auto& a : p.agents) cols += a.K() + a.P();
  Matrix M = Matrix::Zero(lay.rows, cols);
  Index c0 = 0;
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    const auto& a = p.agents[i];
    const double tx = std::sqrt(tau_x[i]);
    M.block(0, c0, p.L, a.K()) = a.E * tx;
    M.block(lay.row_off[i], c0, a.P(), a.K()) = a.C * tx;
    for (Index j = 0; j < a.P(); ++j)
      M(lay.row_off[i] + j, c0 + a.K() + j) = std::sqrt(tau_r[i](j));
    c0 += a.K() + a.P();
  }
  M = sig.cwiseSqrt().asDiagonal() * M;
  return std::sqrt(lambda_max(M.transpose() * M));
}

// Active-set Newton step on the KKT system at the current iterate's
// support pattern. Returns false when the pattern is not usable.
bool polish(const CoupledProblem& p, const KktPoint& cp, KktPoint& out) {
  const std::size_t n = p.agents.size();
  for (const auto& a : p.agents)
    if (!a.cost.separable()) return false;

  // Column bookkeeping: free x coordinates, then free r, then y, then
  // z for rows whose slack is pinned at zero.
  std::vector<std::vector<Index>> x_col(n), r_col(n), z_col(n);
  Index nx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = p.agents[i];
    x_col[i].assign(a.K(), -1);
    for (Index j = 0; j < a.K(); ++j) {
      const double v = cp.primal.x[i](j);
      const bool at_bound = v <= a.set.lower_bound(j) || v >= a.set.upper_bound(j);
      const bool l1_zero = a.cost.kind() == CostFn::Kind::L1 && v == 0.0;
      if (!at_bound && !l1_zero) x_col[i][j] = nx++;
    }
  }
  Index nr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r_col[i].assign(p.agents[i].P(), -1);
    for (Index j = 0; j < p.agents[i].P(); ++j)
      if (cp.primal.r[i](j) > 0.0) r_col[i][j] = nx + nr++;
  }
  const Index y0 = nx + nr;
  Index nz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    z_col[i].assign(p.agents[i].P(), -1);
    for (Index j = 0; j < p.agents[i].P(); ++j)
      if (r_col[i][j] < 0) z_col[i][j] = y0 + p.L + nz++;
  }
  const Index unknowns = y0 + p.L + nz;
  const Layout lay = layout_of(p);
  const Index eqs = nx + lay.rows;

  Matrix A = Matrix::Zero(eqs, unknowns);
  Vector b = Vector::Zero(eqs);
  // stationarity rows for free x: H x + E^T y + C^T z = -g_const
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = p.agents[i];
    for (Index j = 0; j < a.K(); ++j) {
      const Index row = x_col[i][j];
      if (row < 0) continue;
      if (a.cost.kind() == CostFn::Kind::SquaredL2) A(row, row) = 2.0;
      if (a.cost.kind() == CostFn::Kind::L1)
        b(row) = -(cp.primal.x[i](j) > 0 ? a.cost.weight() : -a.cost.weight());
      for (Index l = 0; l < p.L; ++l) A(row, y0 + l) = a.E(l, j);
      for (Index m = 0; m < a.P(); ++m)
        if (z_col[i][m] >= 0) A(row, z_col[i][m]) = a.C(m, j);
    }
  }
  // coupling rows: sum E x = q  (fixed x moved to the right side)
  for (Index l = 0; l < p.L; ++l) b(nx + l) = p.q(l);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = p.agents[i];
    for (Index j = 0; j < a.K(); ++j) {
      const Index col = x_col[i][j];
      if (col >= 0) {
        A.block(nx, col, p.L, 1) = a.E.col(j);
        for (Index m = 0; m < a.P(); ++m) A(nx + lay.row_off[i] + m, col) = a.C(m, j);
      } else {
        const double v = cp.primal.x[i](j);
        if (v == 0.0) continue;
        b.segment(nx, p.L) -= a.E.col(j) * v;
        for (Index m = 0; m < a.P(); ++m) b(nx + lay.row_off[i] + m) -= a.C(m, j) * v;
      }
    }
    for (Index m = 0; m < a.P(); ++m) {
      b(nx + lay.row_off[i] + m) += a.d(m);
      if (r_col[i][m] >= 0) A(nx + lay.row_off[i] + m, r_col[i][m]) = 1.0;
    }
  }

  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  const Vector sol = cod.solve(b);
  if (!sol.allFinite()) return false;

  out = cp;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = p.agents[i];
    for (Index j = 0; j < a.K(); ++j) {
      const Index col = x_col[i][j];
      if (col < 0) continue;
      double v = sol(col);
      // keep the identified sign / interior pattern
      if (a.cost.kind() == CostFn::Kind::L1 &&
          (v > 0) != (cp.primal.x[i](j) > 0))
        return false;
      v = std::clamp(v, a.set.lower_bound(j), a.set.upper_bound(j));
      out.primal.x[i](j) = v;
    }
    for (Index m = 0; m < a.P(); ++m) {
      if (r_col[i][m] >= 0) {
        out.primal.r[i](m) = std::max(sol(r_col[i][m]), 0.0);
        out.z[i](m) = 0.0;
      } else {
        out.primal.r[i](m) = 0.0;
        out.z[i](m) = std::max(sol(z_col[i][m]), 0.0);
      }
    }
  }
  out.y = sol.segment(y0, p.L);
  return true;
}

}  // namespace

double kkt_residual(const CoupledProblem& p, const KktPoint& pt) {
  p.validate();
  const std::size_t n = p.agents.size();
  require(pt.primal.x.size() == n && pt.primal.r.size() == n && pt.z.size() == n &&
              pt.y.size() == p.L,
          "kkt point does not match the problem");
  double stat = 0.0, poly = 0.0, setv = 0.0, dual = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = p.agents[i];
    const Vector& x = pt.primal.x[i];
    const Vector& r = pt.primal.r[i];
    const Vector& z = pt.z[i];
    require(x.size() == a.K() && r.size() == a.P() && z.size() == a.P(),
            "kkt point does not match the problem");
    Vector g = a.E.transpose() * pt.y;
    if (a.P() > 0) g += a.C.transpose() * z;
    if (a.cost.separable()) {
      for (Index j = 0; j < a.K(); ++j) {
        const auto [lo, hi] = subgradient_interval(a, x, j);
        const double target = -g(j);
        const double dist = target < lo ? lo - target : (target > hi ? target - hi : 0.0);
        stat += dist * dist;
      }
    } else {
      // natural residual x - prox_{f + S}(x - g)
      stat += (x - prox_on_set(a.cost, a.set, x - g, 1.0)).squaredNorm();
    }
    setv += (x - a.set.project(x)).squaredNorm();
    if (a.P() > 0) {
      poly += (a.C * x + r - a.d).squaredNorm();
      poly += r.cwiseMin(0.0).squaredNorm();
      dual += z.cwiseMin(0.0).squaredNorm();
      comp += r.cwiseMax(0.0).cwiseMin(z.cwiseMax(0.0)).squaredNorm();
    }
  }
  const Index K = p.total_K(), P = p.total_P();
  const double coup = coupling_residual(p, pt.primal).squaredNorm();
  return rms(stat, K) + rms(setv, K) + rms(coup, p.L) + rms(poly, P) +
         rms(dual, P) + rms(comp, P);
}

OracleResult reference_solve(const CoupledProblem& p, const OracleOptions& opt) {
  p.validate();
  require(opt.tol > 0.0 && opt.max_iters > 0 && opt.check_every > 0,
          "invalid oracle options");
  const std::size_t n = p.agents.size();
  const Layout lay = layout_of(p);

  // Diagonal preconditioning (row/column absolute sums), scalar per x block
  // so the prox of non-separable costs stays exact.
  Vector sig = Vector::Zero(lay.rows);
  std::vector<double> tau_x(n, 1.0);
  std::vector<Vector> tau_r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = p.agents[i];
    sig.head(p.L) += a.E.cwiseAbs().rowwise().sum();
    if (a.P() > 0)
      sig.segment(lay.row_off[i], a.P()) =
          a.C.cwiseAbs().rowwise().sum() + Vector::Ones(a.P());
    double colmax = 0.0;
    for (Index j = 0; j < a.K(); ++j)
      colmax = std::max(colmax, a.E.col(j).cwiseAbs().sum() +
                                    (a.P() > 0 ? a.C.col(j).cwiseAbs().sum() : 0.0));
    tau_x[i] = colmax > 0 ? 1.0 / colmax : 1.0;
    tau_r[i] = Vector::Ones(a.P());
  }
  for (Index l = 0; l < sig.size(); ++l) sig(l) = sig(l) > 0 ? 1.0 / sig(l) : 1.0;
  const double nrm = preconditioned_norm(p, lay, sig, tau_x, tau_r);
  const double scale = nrm > 0 ? 0.99 / nrm : 1.0;
  sig *= scale;
  for (std::size_t i = 0; i < n; ++i) {
    tau_x[i] *= scale;
    tau_r[i] *= scale;
  }

  KktPoint cur;
  cur.primal = PrimalPoint::zeros(p);
  cur.y = Vector::Zero(p.L);
  for (const auto& a : p.agents) cur.z.push_back(Vector::Zero(a.P()));

  OracleResult best;
  best.point = cur;
  best.kkt = kkt_residual(p, cur);

  long polish_gap = 200, last_polish = -polish_gap;
  PrimalPoint prev = cur.primal;
  for (long it = 1; it <= opt.max_iters; ++it) {
    prev = cur.primal;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = p.agents[i];
      Vector g = a.E.transpose() * cur.y;
      if (a.P() > 0) g += a.C.transpose() * cur.z[i];
      cur.primal.x[i] = prox_on_set(a.cost, a.set, cur.primal.x[i] - tau_x[i] * g,
                                    1.0 / tau_x[i]);
      if (a.P() > 0)
        cur.primal.r[i] =
            (cur.primal.r[i] - tau_r[i].cwiseProduct(cur.z[i])).cwiseMax(0.0);
    }
    Vector cy = -p.q;
    for (std::size_t i = 0; i < n; ++i)
      cy += p.agents[i].E * (2.0 * cur.primal.x[i] - prev.x[i]);
    cur.y += sig.head(p.L).cwiseProduct(cy);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = p.agents[i];
      if (a.P() == 0) continue;
      const Vector xb = 2.0 * cur.primal.x[i] - prev.x[i];
      const Vector rb = 2.0 * cur.primal.r[i] - prev.r[i];
      cur.z[i] += sig.segment(lay.row_off[i], a.P())
                      .cwiseProduct(a.C * xb + rb - a.d);
    }

    if (it % opt.check_every != 0 && it != opt.max_iters) continue;
    const double k = kkt_residual(p, cur);
    best.iterations = it;
    if (k < best.kkt) {
      best.kkt = k;
      best.point = cur;
      best.polished = false;
    }
    if (best.kkt <= opt.tol) break;
    if (k < opt.polish_below && it - last_polish >= polish_gap) {
      last_polish = it;
      KktPoint pol;
      if (polish(p, cur, pol)) {
        const double kp = kkt_residual(p, pol);
        if (kp < best.kkt) {
          best.kkt = kp;
          best.point = pol;
          best.polished = true;
        }
        if (best.kkt <= opt.tol) break;
      }
      polish_gap = std::min<long>(polish_gap * 2, 20000);
    }
  }
  best.converged = best.kkt <= opt.tol;
  best.obj_star = objective(p, best.point.primal);
  return best;
}

}  // namespace dcmesh
