#include "dcmesh/problem_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcmesh/format.hpp"

namespace dcmesh {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

using nlohmann::json;

void put_array(std::ostringstream& out, const double* data, Index n,
               bool null_for_inf = false) {
  out << '[';
  for (Index k = 0; k < n; ++k) {
    if (k) out << ',';
    if (null_for_inf && std::isinf(data[k]))
      out << "null";
    else
      out << format_double(data[k]);
  }
  out << ']';
}

void put_vector(std::ostringstream& out, const Vector& v,
                bool null_for_inf = false) {
  put_array(out, v.data(), v.size(), null_for_inf);
}

void put_row_major(std::ostringstream& out, const Matrix& m) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  put_array(out, rm.data(), rm.size());
}

void put_graph(std::ostringstream& out, const Graph& g) {
  out << "{\"n\":" << g.num_nodes() << ",\"edges\":[";
  bool first = true;
  for (auto [i, j] : g.edges()) {
    if (!first) out << ',';
    first = false;
    out << '[' << i << ',' << j << ']';
  }
  out << "]}";
}

Vector get_vector(const json& j, Index expected, const std::string& what,
                  double null_value = std::numeric_limits<double>::quiet_NaN()) {
  require(j.is_array(), what + " must be an array");
  require(static_cast<Index>(j.size()) == expected,
          what + " has " + std::to_string(j.size()) + " entries, expected " +
              std::to_string(expected));
  Vector v(expected);
  for (Index k = 0; k < expected; ++k) {
    const json& e = j[static_cast<std::size_t>(k)];
    if (e.is_null()) {
      require(!std::isnan(null_value), what + " contains null");
      v(k) = null_value;
    } else {
      require(e.is_number(), what + " must contain numbers");
      v(k) = e.get<double>();
    }
  }
  return v;
}

Matrix get_row_major(const json& j, Index rows, Index cols,
                     const std::string& what) {
  Vector flat = get_vector(j, rows * cols, what);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = flat(r * cols + c);
  return m;
}

Index get_dim(const json& obj, const char* key, const std::string& where) {
  require(obj.contains(key) && obj[key].is_number_integer(),
          where + ": missing integer \"" + key + "\"");
  const auto v = obj[key].get<long long>();
  require(v >= 0, where + ": \"" + key + "\" must be >= 0");
  return static_cast<Index>(v);
}

CostFn get_cost(const json& j, const std::string& where) {
  require(j.is_object() && j.contains("type"), where + ": cost needs a type");
  const auto type = j["type"].get<std::string>();
  if (type == "l1") {
    require(j.contains("lambda") && j["lambda"].is_number(),
            where + ": l1 cost needs lambda");
    return CostFn::l1(j["lambda"].get<double>());
  }
  if (type == "sq_l2") return CostFn::squared_l2();
  if (type == "l2") return CostFn::l2_norm();
  if (type == "zero") return CostFn::zero();
  throw Error(where + ": unknown cost type \"" + type + "\"");
}

SimpleSet get_set(const json& j, Index K, const std::string& where) {
  require(j.is_object() && j.contains("type"), where + ": set needs a type");
  const auto type = j["type"].get<std::string>();
  if (type == "full") return SimpleSet::full_space();
  if (type == "nonneg") return SimpleSet::nonnegative();
  if (type == "box") {
    constexpr double inf = std::numeric_limits<double>::infinity();
    require(j.contains("lo") && j.contains("hi"), where + ": box needs lo/hi");
    return SimpleSet::box(get_vector(j["lo"], K, where + ".lo", -inf),
                          get_vector(j["hi"], K, where + ".hi", inf));
  }
  throw Error(where + ": unknown set type \"" + type + "\"");
}

Graph graph_from(const json& j) {
  require(j.is_object(), "graph must be an object");
  const Index n = get_dim(j, "n", "graph");
  require(j.contains("edges") && j["edges"].is_array(), "graph needs edges");
  std::vector<Graph::Edge> edges;
  for (const auto& e : j["edges"]) {
    require(e.is_array() && e.size() == 2, "graph edge must be [i, j]");
    const auto a = e[0].get<long long>();
    const auto b = e[1].get<long long>();
    require(a >= 0 && b >= 0, "graph edge index must be >= 0");
    edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
  return Graph(static_cast<std::size_t>(n), edges);
}

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string problem_to_json(const CoupledProblem& p, const Graph* graph) {
  p.validate();
  std::ostringstream out;
  out << "{\"L\":" << p.L << ",\"q\":";
  put_vector(out, p.q);
  out << ",\"agents\":[";
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    const auto& a = p.agents[i];
    if (i) out << ',';
    out << "\n{\"K\":" << a.K() << ",\"P\":" << a.P() << ",\"E\":";
    put_row_major(out, a.E);
    out << ",\"C\":";
    put_row_major(out, a.C);
    out << ",\"d\":";
    put_vector(out, a.d);
    out << ",\"cost\":{\"type\":\"" << a.cost.name() << '"';
    if (a.cost.kind() == CostFn::Kind::L1)
      out << ",\"lambda\":" << format_double(a.cost.weight());
    out << "},\"set\":{\"type\":\"" << a.set.name() << '"';
    if (a.set.kind() == SimpleSet::Kind::Box) {
      out << ",\"lo\":";
      put_vector(out, a.set.lower(), true);
      out << ",\"hi\":";
      put_vector(out, a.set.upper(), true);
    }
    out << "}}";
  }
  out << "]";
  if (graph) {
    out << ",\n\"graph\":";
    put_graph(out, *graph);
  }
  out << "}\n";
  return out.str();
}

CoupledProblem problem_from_json(std::string_view text,
                                 std::optional<Graph>* graph) {
  const json doc = parse(text);
  require(doc.is_object(), "problem document must be a JSON object");
  CoupledProblem p;
  try {
    p.L = get_dim(doc, "L", "problem");
    require(doc.contains("q"), "problem: missing q");
    p.q = get_vector(doc["q"], p.L, "q");
    require(doc.contains("agents") && doc["agents"].is_array(),
            "problem: missing agents array");
    std::size_t idx = 0;
    for (const auto& aj : doc["agents"]) {
      const std::string where = "agents[" + std::to_string(idx++) + "]";
      require(aj.is_object(), where + " must be an object");
      AgentData a;
      const Index K = get_dim(aj, "K", where);
      const Index P = get_dim(aj, "P", where);
      a.E = get_row_major(aj.at("E"), p.L, K, where + ".E");
      a.C = get_row_major(aj.at("C"), P, K, where + ".C");
      a.d = get_vector(aj.at("d"), P, where + ".d");
      a.cost = get_cost(aj.at("cost"), where);
      a.set = get_set(aj.at("set"), K, where);
      p.agents.push_back(std::move(a));
    }
    if (graph && doc.contains("graph")) *graph = graph_from(doc["graph"]);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid problem document: ") + e.what());
  }
  p.validate();
  return p;
}

std::string graph_to_json(const Graph& g) {
  std::ostringstream out;
  put_graph(out, g);
  return out.str();
}

Graph graph_from_json(std::string_view text) {
  try {
    return graph_from(parse(text));
  } catch (const json::exception& e) {
    throw Error(std::string("invalid graph document: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), "write failed for " + path.string());
}

void save_problem(const std::filesystem::path& path, const CoupledProblem& p,
                  const Graph* graph) {
  write_text_file(path, problem_to_json(p, graph));
}

CoupledProblem load_problem(const std::filesystem::path& path,
                            std::optional<Graph>* graph) {
  return problem_from_json(read_text_file(path), graph);
}

}  // namespace dcmesh
