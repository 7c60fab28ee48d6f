#include "dcmesh/trace_io.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcmesh/format.hpp"

namespace dcmesh {

namespace {

nlohmann::json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::vector<std::string> trace_columns(const ConvergenceTrace& t,
                                       const CsvOptions& opt) {
  std::vector<std::string> cols = {
      "k",           "objective",     "acc",
      "feas",        "coupling_norm", "consensus",
      "sum_p_inf",   "ergodic_objective", "ergodic_gap"};
  if (opt.timing) cols.emplace_back("inner_seconds");
  cols.emplace_back("inner_iterations");
  cols.emplace_back("inner_cap_hits");
  if (t.randomized) {
    cols.emplace_back("active_agents");
    cols.emplace_back("active_edges");
  }
  return cols;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string trace_to_csv(const ConvergenceTrace& t, const CsvOptions& opt) {
  std::ostringstream out;
  const auto cols = trace_columns(t, opt);
  for (std::size_t c = 0; c < cols.size(); ++c)
    out << (c ? "," : "") << csv_field(cols[c]);
  out << "\r\n";
  for (const auto& r : t.rows) {
    out << r.k << ',' << format_double(r.objective) << ',' << format_double(r.acc)
        << ',' << format_double(r.feas) << ',' << format_double(r.coupling_norm)
        << ',' << format_double(r.consensus) << ',' << format_double(r.sum_p_inf)
        << ',' << format_double(r.ergodic_objective) << ','
        << format_double(r.ergodic_gap);
    if (opt.timing) out << ',' << format_double(r.inner_seconds);
    out << ',' << r.inner_iterations << ',' << r.inner_cap_hits;
    if (t.randomized) out << ',' << r.active_agents << ',' << r.active_edges;
    out << "\r\n";
  }
  return out.str();
}

std::string trace_summary_json(const ConvergenceTrace& t) {
  using nlohmann::json;
  json j;
  j["algorithm"] = t.algorithm;
  json meta = json::object();
  for (const auto& [k, v] : t.metadata) meta[k] = v;
  j["config"] = meta;
  j["iterations"] = t.rows.size();
  j["stop_iteration"] = t.stop_iteration;
  j["converged"] = t.converged;
  j["stop_rule"] = t.stop_rule;
  if (!t.obj_star) j["note"] = "no obj_star given; residual stop rule used";
  j["obj_star"] = t.obj_star ? num(*t.obj_star) : json(nullptr);
  j["wall_time"] = num(t.wall_seconds);
  j["inner_time"] = num(t.total_inner_seconds());
  if (!t.rows.empty()) {
    const auto& last = t.rows.back();
    j["final_objective"] = num(last.objective);
    j["final_acc"] = num(last.acc);
    j["final_feas"] = num(last.feas);
    j["final_coupling"] = num(last.coupling_norm);
    j["final_consensus"] = num(last.consensus);
  }
  if (t.invariants.checked) {
    const auto& inv = t.invariants;
    j["invariants"] = {{"sum_p_ratio", num(inv.sum_p_ratio)},
                       {"uv_ratio", num(inv.uv_ratio)},
                       {"aggregation_ratio", num(inv.aggregation_ratio)},
                       {"t_symmetric", inv.t_symmetric},
                       {"x_in_set", inv.x_in_set},
                       {"r_nonnegative", inv.r_nonnegative},
                       {"idle_frozen", inv.idle_frozen},
                       {"iterations_checked", inv.iterations_checked}};
  }
  return j.dump(2) + "\n";
}

}  // namespace dcmesh
