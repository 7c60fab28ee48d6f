#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dcmesh/dc_admm.hpp"
#include "dcmesh/format.hpp"
#include "dcmesh/oracle.hpp"
#include "dcmesh/pdc_admm.hpp"
#include "dcmesh/problem_io.hpp"
#include "dcmesh/randomized.hpp"
#include "dcmesh/trace_io.hpp"

namespace dcmesh::tools {

namespace {

using nlohmann::json;

struct Instance {
  std::string name;
  std::string kind;
  LassoSpec lasso;
  LoadControlSpec load;
};

struct Settings {
  SolverConfig cfg;
  double edge_prob = 0.4;
  double alpha = 1.0;
  double pe = 0.0;
};

struct Cell {
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  std::string algorithm;

  bool ok = false;
  std::string error;
  bool converged = false;
  int iterations = 0;
  double acc = 0.0, feas = 0.0;
  double wall = 0.0, inner = 0.0;
  std::size_t agents = 0;
};

Instance parse_instance(const json& j, std::size_t idx) {
  Instance in;
  in.kind = j.value("kind", "lasso");
  in.name = j.value("name", in.kind + std::to_string(idx));
  if (in.kind == "lasso") {
    in.lasso.n_agents = j.value("agents", in.lasso.n_agents);
    in.lasso.K = j.value("K", in.lasso.K);
    in.lasso.L = j.value("L", in.lasso.L);
    in.lasso.P = j.value("P", in.lasso.P);
    in.lasso.lambda = j.value("lambda", in.lasso.lambda);
  } else if (in.kind == "loadcontrol") {
    in.load.n_agents = j.value("agents", in.load.n_agents);
    in.load.K = j.value("K", in.load.K);
    in.load.L = j.value("L", in.load.L);
    in.load.P = j.value("P", in.load.P);
  } else {
    throw Error("unknown instance kind: " + in.kind);
  }
  return in;
}

Settings parse_settings(const json& j) {
  Settings s;
  auto& c = s.cfg;
  c.c = j.value("c", c.c);
  c.tau = j.value("tau", c.tau);
  c.eps2 = j.value("eps2", c.eps2);
  c.eps1 = j.value("eps1", c.eps1);
  c.c1 = j.value("c1", c.c1);
  c.beta_factor = j.value("beta_factor", c.beta_factor);
  c.max_outer = j.value("max_iters", c.max_outer);
  c.stop_tol = j.value("stop_tol", c.stop_tol);
  c.stop_window = j.value("stop_window", c.stop_window);
  s.edge_prob = j.value("edge_prob", s.edge_prob);
  s.alpha = j.value("alpha", s.alpha);
  s.pe = j.value("pe", s.pe);
  return s;
}

void run_cell(Cell& cell, const Instance& in, const Settings& st) {
  const CoupledProblem p = in.kind == "lasso"
                               ? make_constrained_lasso(in.lasso, cell.seed)
                               : make_load_control(in.load, cell.seed);
  const Graph g = random_connected_graph(p.num_agents(), st.edge_prob, cell.seed);
  const OracleResult orc = reference_solve(p);
  require(orc.converged, "oracle did not reach its tolerance");
  SolverConfig cfg = st.cfg;
  cfg.seed = cell.seed;
  ConvergenceTrace t;
  if (cell.algorithm == "pdc") {
    t = pdc_run(p, g, cfg, orc.obj_star);
  } else if (cell.algorithm == "dc") {
    t = dc_run(p, g, cfg, orc.obj_star);
  } else if (cell.algorithm == "rpdc") {
    const auto model = ActivityModel::uniform(p.num_agents(), st.alpha, st.pe, cell.seed);
    t = rpdc_run(p, g, cfg, model, orc.obj_star);
  } else {
    throw Error("unknown algorithm: " + cell.algorithm);
  }
  cell.ok = true;
  cell.converged = t.converged;
  cell.iterations = t.converged ? t.stop_iteration : static_cast<int>(t.rows.size());
  const TraceRow& last = t.converged ? *t.row_at(t.stop_iteration) : t.rows.back();
  cell.acc = last.acc;
  cell.feas = last.feas;
  cell.wall = t.wall_seconds;
  cell.inner = t.inner_seconds_through(cell.iterations);
  cell.agents = p.num_agents();
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

int thread_budget() {
  if (const char* env = std::getenv("DCMESH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run_bench(const std::string& config_text, const std::filesystem::path& out_dir,
              int threads) {
  json conf;
  try {
    conf = json::parse(config_text);
  } catch (const json::exception& e) {
    throw Error(std::string("bad sweep config: ") + e.what());
  }
  std::vector<Instance> instances;
  for (const auto& j : conf.value("instances", json::array()))
    instances.push_back(parse_instance(j, instances.size()));
  const auto algorithms = conf.value("algorithms", std::vector<std::string>{});
  const auto seeds = conf.value("seeds", std::vector<std::uint64_t>{});
  const Settings st = parse_settings(conf.value("settings", json::object()));

  std::vector<Cell> cells;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (auto s : seeds)
      for (const auto& a : algorithms) {
        Cell c;
        c.instance = i;
        c.seed = s;
        c.algorithm = a;
        cells.push_back(c);
      }

  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), cells.size());
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) {
          try {
            run_cell(cells[c], instances[cells[c].instance], st);
          } catch (const std::exception& e) {
            cells[c].ok = false;
            cells[c].error = e.what();
          }
        }
      });
  }

  std::filesystem::create_directories(out_dir);
  std::ostringstream cell_csv, agg_csv, time_csv;
  cell_csv << "instance,seed,algorithm,status,converged,iterations,acc,feas\r\n";
  for (const auto& c : cells) {
    cell_csv << csv_field(instances[c.instance].name) << ',' << c.seed << ','
             << csv_field(c.algorithm) << ','
             << csv_field(c.ok ? "ok" : "error: " + c.error) << ','
             << (c.converged ? 1 : 0) << ',' << c.iterations << ','
             << format_double(c.acc) << ',' << format_double(c.feas) << "\r\n";
  }

  agg_csv << "instance,algorithm,runs,failed,converged,mean_iterations,mean_acc,mean_feas\r\n";
  time_csv << "instance,algorithm,runs,mean_wall_seconds,mean_inner_seconds,mean_inner_seconds_per_agent\r\n";
  int failed_total = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& a : algorithms) {
      std::vector<double> its, acc, feas, wall, inner, per_agent;
      int runs = 0, failed = 0, conv = 0;
      for (const auto& c : cells) {
        if (c.instance != i || c.algorithm != a) continue;
        ++runs;
        if (!c.ok) {
          ++failed;
          continue;
        }
        conv += c.converged ? 1 : 0;
        its.push_back(c.iterations);
        acc.push_back(std::abs(c.acc));
        feas.push_back(c.feas);
        wall.push_back(c.wall);
        inner.push_back(c.inner);
        per_agent.push_back(c.inner / static_cast<double>(c.agents));
      }
      failed_total += failed;
      const std::string name = csv_field(instances[i].name);
      agg_csv << name << ',' << csv_field(a) << ',' << runs << ',' << failed << ','
              << conv << ',' << format_double(mean(its)) << ','
              << format_double(mean(acc)) << ',' << format_double(mean(feas)) << "\r\n";
      time_csv << name << ',' << csv_field(a) << ',' << runs << ','
               << format_double(mean(wall)) << ',' << format_double(mean(inner)) << ','
               << format_double(mean(per_agent)) << "\r\n";
    }
  }
  write_text_file(out_dir / "cells.csv", cell_csv.str());
  write_text_file(out_dir / "aggregate.csv", agg_csv.str());
  write_text_file(out_dir / "timing.csv", time_csv.str());
  return failed_total;
}

}  // namespace dcmesh::tools
