#pragma once

#include <string>

namespace dcmesh {

/// Text form used by every file the library writes: 17 significant digits
/// (round-trips any double). Non-finite values become "nan", "inf", "-inf".
std::string format_double(double v);

}  // namespace dcmesh
