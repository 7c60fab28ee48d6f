#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dcmesh/graph.hpp"
#include "dcmesh/problem.hpp"

namespace dcmesh {

// Problem file layout (all matrices row-major, floats at 17 significant
// digits, infinite box bounds written as null):
//
//   {"L": int, "q": [...],
//    "agents": [{"K": int, "P": int, "E": [...], "C": [...], "d": [...],
//                "cost": {"type": "l1"|"sq_l2"|"l2"|"zero", "lambda": x},
//                "set": {"type": "full"|"nonneg"|"box", "lo": [...], "hi": [...]}}],
//    "graph": {"n": int, "edges": [[i, j], ...]}}      <- optional, i < j

std::string problem_to_json(const CoupledProblem& p,
                            const Graph* graph = nullptr);

/// Parses and validates a problem document. If `graph` is non-null and the
/// document carries a "graph" object, it is parsed into *graph.
CoupledProblem problem_from_json(std::string_view text,
                                 std::optional<Graph>* graph = nullptr);

std::string graph_to_json(const Graph& g);
Graph graph_from_json(std::string_view text);

void save_problem(const std::filesystem::path& path, const CoupledProblem& p,
                  const Graph* graph = nullptr);
CoupledProblem load_problem(const std::filesystem::path& path,
                            std::optional<Graph>* graph = nullptr);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace dcmesh
