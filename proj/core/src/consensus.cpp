#include "dcmesh/consensus.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace dcmesh {

NetworkState initial_state(const CoupledProblem& p) {
  NetworkState s;
  s.reserve(p.agents.size());
  for (const auto& a : p.agents) {
    s.push_back(AgentState{Vector::Zero(a.K()), Vector::Zero(a.P()),
                           Vector::Zero(p.L), Vector::Zero(a.P()),
                           Vector::Zero(p.L)});
  }
  return s;
}

double SolverConfig::tau_for(std::size_t agent) const {
  if (agent < tau_per_agent.size()) return tau_per_agent[agent];
  return tau > 0.0 ? tau : c;
}

void SolverConfig::validate(std::size_t n_agents) const {
  require(c > 0.0, "c must be > 0");
  require(tau_per_agent.empty() || tau_per_agent.size() == n_agents,
          "tau_per_agent must have one entry per agent");
  for (double t : tau_per_agent) require(t > 0.0, "tau values must be > 0");
  require(eps2 > 0.0 && eps1 > 0.0, "inner tolerances must be > 0");
  require(beta_factor > 0.0, "beta_factor must be > 0");
  require(c1 > 0.0, "c1 must be > 0");
  require(max_bsum >= 1 && max_inner_admm >= 1, "inner caps must be >= 1");
  require(max_outer >= 1, "max_outer must be >= 1");
  require(stop_tol >= 0.0, "stop_tol must be >= 0");
  require(stop_window >= 1, "stop_window must be >= 1");
  require(threads >= 1, "threads must be >= 1");
}

void check_run_inputs(const CoupledProblem& p, const Graph& g,
                      const SolverConfig& cfg) {
  p.validate();
  require(g.num_nodes() == p.num_agents(),
          "graph has " + std::to_string(g.num_nodes()) + " nodes but problem has " +
              std::to_string(p.num_agents()) + " agents");
  require(is_connected(g), "agent graph is not connected");
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    require(g.degree(i) >= 1, "agent " + std::to_string(i) + " has no neighbors");
  cfg.validate(p.num_agents());
}

Vector edge_midpoint(const Vector& yi, const Vector& yj) {
  return 0.5 * (yi + yj);
}

Vector neighbor_sum(const NetworkState& s, const Graph& g, std::size_t i) {
  Vector acc = Vector::Zero(s[i].y.size());
  for (std::size_t j : g.neighbors(i)) acc += s[i].y + s[j].y;
  return acc;
}

Vector local_dual_update(const Vector& neighbor_term, const Vector& p_prev,
                         const Vector& ex, const Vector& q, double n_agents,
                         double c, double degree) {
  return (neighbor_term - p_prev / c + (ex - q / n_agents) / c) /
         (2.0 * degree);
}

Vector edge_dual_update(std::size_t i, const NetworkState& s, const Graph& g,
                        double c) {
  Vector acc = Vector::Zero(s[i].y.size());
  for (std::size_t j : g.neighbors(i))
    acc += s[i].y - edge_midpoint(s[i].y, s[j].y);
  return s[i].p + (2.0 * c) * acc;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t i = next++; i < n; i = next++) fn(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      });
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace dcmesh
