#pragma once

#include <filesystem>
#include <string>

namespace dcmesh::tools {

/// Runs every (instance, seed, algorithm) cell of the sweep and writes
/// cells.csv, aggregate.csv and timing.csv into out_dir. Returns the number
/// of failed cells.
int run_bench(const std::string& config_text, const std::filesystem::path& out_dir,
              int threads);

/// DCMESH_THREADS if set, otherwise the hardware concurrency.
int thread_budget();

}  // namespace dcmesh::tools
