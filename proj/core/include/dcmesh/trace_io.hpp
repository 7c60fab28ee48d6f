#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dcmesh/diagnostics.hpp"

namespace dcmesh {

struct CsvOptions {
  /// Emit the wall-clock column. Off when traces are compared across runs.
  bool timing = true;
};

/// Column names in output order for this trace.
std::vector<std::string> trace_columns(const ConvergenceTrace& t,
                                       const CsvOptions& opt = {});

/// Header plus one line per row. Floats use 17 significant digits; the
/// active-count columns appear only for randomized traces.
std::string trace_to_csv(const ConvergenceTrace& t, const CsvOptions& opt = {});

/// RFC-4180 field: quoted when it holds a comma, quote or line break.
std::string csv_field(std::string_view s);

/// Run summary sidecar: iterations, wall time, final Acc/Feas, stop rule,
/// metadata and debug invariants.
std::string trace_summary_json(const ConvergenceTrace& t);

}  // namespace dcmesh
