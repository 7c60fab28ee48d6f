#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bench.hpp"
#include "dcmesh/dc_admm.hpp"
#include "dcmesh/format.hpp"
#include "dcmesh/oracle.hpp"
#include "dcmesh/pdc_admm.hpp"
#include "dcmesh/problem_io.hpp"
#include "dcmesh/randomized.hpp"
#include "dcmesh/trace_io.hpp"

using namespace dcmesh;

namespace {

struct GenerateArgs {
  std::string kind = "lasso";
  std::size_t agents = 10;
  Index K = 0, L = 0, P = 0;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct SolveArgs {
  std::string problem;
  std::string algorithm = "pdc";
  std::optional<std::uint64_t> graph_seed;
  double edge_prob = 0.4;
  double c = 0.1;
  double tau = 0.0;
  std::optional<double> eps_inner;
  double beta_factor = 1.01;
  double c1 = 5.0;
  std::optional<double> alpha;
  std::optional<double> pe;
  std::uint64_t seed = 0;
  int max_iters = 1000;
  double stop_tol = 1e-4;
  std::optional<int> stop_window;
  std::optional<double> obj_star;
  bool debug = false;
  int threads = 1;
  std::string trace_out;
  std::string summary_out;
};

struct OracleArgs {
  std::string problem;
  double tol = 1e-9;
  long max_iters = 1000000;
  std::string out;
};

int do_generate(const GenerateArgs& a) {
  CoupledProblem p;
  if (a.kind == "lasso") {
    LassoSpec s;
    s.n_agents = a.agents;
    if (a.K) s.K = a.K;
    if (a.L) s.L = a.L;
    if (a.P) s.P = a.P;
    s.lambda = a.lambda;
    p = make_constrained_lasso(s, a.seed);
  } else {
    LoadControlSpec s;
    s.n_agents = a.agents;
    if (a.K) s.K = a.K;
    if (a.L) s.L = a.L;
    if (a.P) s.P = a.P;
    p = make_load_control(s, a.seed);
  }
  save_problem(a.out, p);
  std::printf("N=%zu L=%lld sumK=%lld sumP=%lld\n", p.num_agents(),
              static_cast<long long>(p.L), static_cast<long long>(p.total_K()),
              static_cast<long long>(p.total_P()));
  return 0;
}

int do_solve(const SolveArgs& a) {
  std::optional<Graph> embedded;
  const CoupledProblem p = load_problem(a.problem, &embedded);
  const Graph g = (embedded && !a.graph_seed)
                      ? *embedded
                      : random_connected_graph(p.num_agents(), a.edge_prob,
                                               a.graph_seed.value_or(0));
  SolverConfig cfg;
  cfg.c = a.c;
  cfg.tau = a.tau;
  cfg.beta_factor = a.beta_factor;
  cfg.c1 = a.c1;
  if (a.eps_inner) {
    cfg.eps2 = *a.eps_inner;
    cfg.eps1 = *a.eps_inner;
  }
  cfg.seed = a.seed;
  cfg.max_outer = a.max_iters;
  cfg.stop_tol = a.stop_tol;
  cfg.debug = a.debug;
  cfg.threads = a.threads;

  ConvergenceTrace t;
  if (a.algorithm == "pdc") {
    cfg.stop_window = a.stop_window.value_or(1);
    t = pdc_run(p, g, cfg, a.obj_star);
  } else if (a.algorithm == "dc") {
    cfg.stop_window = a.stop_window.value_or(1);
    t = dc_run(p, g, cfg, a.obj_star);
  } else {
    if (!a.alpha || !a.pe) throw Error("rpdc needs --alpha and --pe");
    const auto model = ActivityModel::uniform(p.num_agents(), *a.alpha, *a.pe, a.seed);
    cfg.stop_window = a.stop_window.value_or(model.deterministic() ? 1 : 10);
    t = rpdc_run(p, g, cfg, model, a.obj_star);
  }
  if (!a.trace_out.empty()) write_text_file(a.trace_out, trace_to_csv(t));
  const std::string summary = trace_summary_json(t);
  if (!a.summary_out.empty())
    write_text_file(a.summary_out, summary);
  else if (!a.trace_out.empty())
    write_text_file(a.trace_out + ".json", summary);
  std::cout << summary;
  return t.converged ? 0 : 2;
}

int do_oracle(const OracleArgs& a) {
  const CoupledProblem p = load_problem(a.problem);
  OracleOptions opt;
  opt.tol = a.tol;
  opt.max_iters = a.max_iters;
  const OracleResult r = reference_solve(p, opt);
  nlohmann::json x = nlohmann::json::array();
  for (const auto& xi : r.point.primal.x)
    x.push_back(std::vector<double>(xi.data(), xi.data() + xi.size()));
  nlohmann::json j = {{"obj_star", r.obj_star},
                      {"kkt", r.kkt},
                      {"converged", r.converged},
                      {"iterations", r.iterations},
                      {"x", x}};
  const std::string text = j.dump() + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text_file(a.out, text);
  std::fprintf(stderr, "obj*=%s kkt=%.3g%s\n", format_double(r.obj_star).c_str(),
               r.kkt, r.converged ? "" : " (not converged)");
  return r.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dcmesh: distributed consensus ADMM toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a random problem instance");
  g->add_option("kind", gen.kind, "lasso | loadcontrol")
      ->required()
      ->check(CLI::IsMember({"lasso", "loadcontrol"}));
  g->add_option("--agents", gen.agents, "number of non-slack agents");
  g->add_option("--K", gen.K, "variables per agent");
  g->add_option("--L", gen.L, "coupling rows");
  g->add_option("--P", gen.P, "polyhedra rows per agent");
  g->add_option("--lambda", gen.lambda, "l1 weight (lasso)");
  g->add_option("--seed", gen.seed);
  g->add_option("-o,--out", gen.out)->required();

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "run a distributed solver");
  s->add_option("problem", sol.problem)->required()->check(CLI::ExistingFile);
  s->add_option("--algorithm", sol.algorithm)
      ->check(CLI::IsMember({"pdc", "dc", "rpdc"}));
  s->add_option("--graph-seed", sol.graph_seed);
  s->add_option("--edge-prob", sol.edge_prob);
  s->add_option("--c", sol.c);
  s->add_option("--tau", sol.tau, "0 means tau = c");
  s->add_option("--eps-inner", sol.eps_inner, "eps2 (pdc/rpdc) or eps1 (dc)");
  s->add_option("--beta-factor", sol.beta_factor);
  s->add_option("--c1", sol.c1, "inner ADMM penalty (dc)");
  s->add_option("--alpha", sol.alpha);
  s->add_option("--pe", sol.pe);
  s->add_option("--seed", sol.seed);
  s->add_option("--max-iters", sol.max_iters);
  s->add_option("--stop-tol", sol.stop_tol);
  s->add_option("--stop-window", sol.stop_window);
  s->add_option("--obj-star", sol.obj_star);
  s->add_flag("--debug", sol.debug, "check structural invariants every iteration");
  s->add_option("--threads", sol.threads);
  s->add_option("-t,--trace", sol.trace_out, "trace CSV path");
  s->add_option("--summary", sol.summary_out, "summary JSON path");

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "centralized reference solve");
  o->add_option("problem", orc.problem)->required()->check(CLI::ExistingFile);
  o->add_option("--tol", orc.tol);
  o->add_option("--max-iters", orc.max_iters);
  o->add_option("-o,--out", orc.out);

  std::string bench_conf, bench_out;
  auto* b = app.add_subcommand("bench", "run a sweep and aggregate");
  b->add_option("config", bench_conf)->required()->check(CLI::ExistingFile);
  b->add_option("-o,--out-dir", bench_out)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return do_generate(gen);
    if (*s) return do_solve(sol);
    if (*o) return do_oracle(orc);
    if (*b) {
      const int failed = tools::run_bench(read_text_file(bench_conf), bench_out,
                                          tools::thread_budget());
      if (failed) std::fprintf(stderr, "%d cell(s) failed\n", failed);
      return failed ? 3 : 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
