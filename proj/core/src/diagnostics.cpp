#include "dcmesh/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace dcmesh {

double ConvergenceTrace::total_inner_seconds() const {
  double t = 0.0;
  for (const auto& r : rows) t += r.inner_seconds;
  return t;
}

double ConvergenceTrace::inner_seconds_through(int k) const {
  double t = 0.0;
  for (const auto& r : rows) {
    if (r.k > k) break;
    t += r.inner_seconds;
  }
  return t;
}

const TraceRow* ConvergenceTrace::row_at(int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > rows.size()) return nullptr;
  const TraceRow& r = rows[static_cast<std::size_t>(k - 1)];
  return r.k == k ? &r : nullptr;
}

PrimalPoint primal_of(const NetworkState& s) {
  PrimalPoint pt;
  pt.x.reserve(s.size());
  pt.r.reserve(s.size());
  for (const auto& a : s) {
    pt.x.push_back(a.x);
    pt.r.push_back(a.r);
  }
  return pt;
}

double consensus_residual(const NetworkState& s, const Graph& g) {
  double worst = 0.0;
  for (auto [i, j] : g.edges()) worst = std::max(worst, (s[i].y - s[j].y).norm());
  return worst;
}

double ergodic_gap(const CoupledProblem& p, const PrimalPoint& avg,
                   double obj_star) {
  double gap = std::abs(objective(p, avg) - obj_star) +
               coupling_residual(p, avg).norm();
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    const auto& a = p.agents[i];
    if (a.P() == 0) continue;
    const Vector r = avg.r[i].size() == a.P() ? avg.r[i] : Vector::Zero(a.P());
    gap += (a.C * avg.x[i] + r - a.d).norm();
  }
  return gap;
}

TraceRecorder::TraceRecorder(const CoupledProblem& p, const Graph& g,
                             std::optional<double> obj_star,
                             ConvergenceTrace& trace)
    : problem_(p), graph_(g), obj_star_(obj_star), trace_(trace) {
  require(!obj_star || (std::isfinite(*obj_star) && *obj_star != 0.0),
          "obj* must be finite and nonzero (Acc is relative)");
  trace_.obj_star = obj_star;
  trace_.ergodic = PrimalPoint::zeros(p);
}

const TraceRow& TraceRecorder::record(const NetworkState& snapshot,
                                      const IterationStats& stats) {
  TraceRow row;
  row.k = static_cast<int>(trace_.rows.size()) + 1;

  trace_.last = primal_of(snapshot);
  // DC-ADMM carries no slack; use the natural one, max(d - C x, 0).
  for (std::size_t i = 0; i < problem_.agents.size(); ++i) {
    const auto& a = problem_.agents[i];
    if (trace_.last.r[i].size() != a.P())
      trace_.last.r[i] = (a.d - a.C * trace_.last.x[i]).cwiseMax(0.0);
  }

  const double kk = static_cast<double>(row.k);
  for (std::size_t i = 0; i < problem_.agents.size(); ++i) {
    trace_.ergodic.x[i] = ((kk - 1.0) * trace_.ergodic.x[i] + trace_.last.x[i]) / kk;
    trace_.ergodic.r[i] = ((kk - 1.0) * trace_.ergodic.r[i] + trace_.last.r[i]) / kk;
  }

  row.objective = objective(problem_, trace_.last);
  row.feas = feas_metric(problem_, trace_.last);
  row.coupling_norm = coupling_residual(problem_, trace_.last).norm();
  row.consensus = consensus_residual(snapshot, graph_);
  Vector sum_p = Vector::Zero(problem_.L);
  for (const auto& a : snapshot) sum_p += a.p;
  row.sum_p_inf = sum_p.lpNorm<Eigen::Infinity>();
  row.ergodic_objective = objective(problem_, trace_.ergodic);
  if (obj_star_) {
    row.acc = acc_metric(row.objective, *obj_star_);
    row.ergodic_gap = ergodic_gap(problem_, trace_.ergodic, *obj_star_);
  }
  row.inner_seconds = stats.inner_seconds;
  row.inner_iterations = stats.inner_iterations;
  row.inner_cap_hits = stats.inner_cap_hits;
  row.active_agents = stats.active_agents;
  row.active_edges = stats.active_edges;
  trace_.rows.push_back(row);
  return trace_.rows.back();
}

RateCertificate rate_certificate(const ConvergenceTrace& trace, int m_lo,
                                 int m_hi) {
  require(trace.obj_star.has_value(), "rate certificate needs obj*");
  require(m_lo >= 1 && m_hi >= m_lo, "invalid rate-certificate window");
  require(static_cast<int>(trace.rows.size()) >= m_lo,
          "rate certificate needs at least " + std::to_string(m_lo) + " rows");
  std::vector<double> scaled;
  for (const auto& r : trace.rows) {
    if (r.k < m_lo || r.k > m_hi) continue;
    scaled.push_back(static_cast<double>(r.k) * r.ergodic_gap);
  }
  RateCertificate cert;
  cert.samples = static_cast<int>(scaled.size());
  cert.sup = *std::max_element(scaled.begin(), scaled.end());
  std::vector<double> sorted = scaled;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  cert.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return cert;
}

bool stop_rule_met(const ConvergenceTrace& trace, double tol, int window) {
  const std::size_t w = static_cast<std::size_t>(std::max(window, 1));
  if (trace.rows.size() < w) return false;
  std::vector<double> vals;
  vals.reserve(w);
  for (std::size_t k = trace.rows.size() - w; k < trace.rows.size(); ++k) {
    const auto& r = trace.rows[k];
    vals.push_back(trace.obj_star ? std::abs(r.acc) + r.feas
                                  : r.consensus + r.coupling_norm + r.feas);
  }
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2] <= tol;
}

// ------------------------------------------------------------ debug duals

EdgeDualDebug::EdgeDualDebug(const Graph& g, Index L) : graph_(g) {
  u_.resize(g.num_nodes());
  v_.resize(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    u_[i].assign(g.degree(i), Vector::Zero(L));
    v_[i].assign(g.degree(i), Vector::Zero(L));
  }
}

std::size_t EdgeDualDebug::slot_of(std::size_t i, std::size_t j) const {
  const auto nb = graph_.neighbors(i);
  return static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), j) -
                                  nb.begin());
}

void EdgeDualDebug::update(std::size_t i, const NetworkState& s,
                           const std::vector<Vector>& t, double c,
                           const std::vector<char>* active_edges) {
  const auto nb = graph_.neighbors(i);
  const auto inc = graph_.incident_edges(i);
  for (std::size_t slot = 0; slot < nb.size(); ++slot) {
    const std::size_t e = inc[slot];
    if (active_edges && !(*active_edges)[e]) continue;
    const std::size_t j = nb[slot];
    u_[i][slot] += c * (s[i].y - t[e]);
    v_[j][slot_of(j, i)] += c * (s[i].y - t[e]);
  }
}

std::pair<double, double> EdgeDualDebug::check(const NetworkState& s) const {
  double uv = 0.0;
  double agg = 0.0;
  for (std::size_t i = 0; i < graph_.num_nodes(); ++i) {
    const auto nb = graph_.neighbors(i);
    Vector sum = Vector::Zero(s[i].p.size());
    for (std::size_t slot = 0; slot < nb.size(); ++slot) {
      const std::size_t j = nb[slot];
      const Vector& u = u_[i][slot];
      uv = std::max(uv, (u + v_[i][slot]).lpNorm<Eigen::Infinity>() /
                            (1.0 + u.lpNorm<Eigen::Infinity>()));
      sum += u + v_[j][slot_of(j, i)];
    }
    agg = std::max(agg, (s[i].p - sum).lpNorm<Eigen::Infinity>() /
                            (1.0 + s[i].p.lpNorm<Eigen::Infinity>()));
  }
  return {uv, agg};
}

void check_state_invariants(const CoupledProblem& p, const NetworkState& s,
                            InvariantReport& report) {
  report.checked = true;
  ++report.iterations_checked;
  Vector sum_p = Vector::Zero(p.L);
  double max_p = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum_p += s[i].p;
    max_p = std::max(max_p, s[i].p.lpNorm<Eigen::Infinity>());
    if (!p.agents[i].set.contains(s[i].x)) report.x_in_set = false;
    if (s[i].r.size() > 0 && (s[i].r.array() < 0.0).any())
      report.r_nonnegative = false;
  }
  report.sum_p_ratio = std::max(
      report.sum_p_ratio, sum_p.lpNorm<Eigen::Infinity>() / (1.0 + max_p));
}

}  // namespace dcmesh
