#pragma once

namespace dualgem {

inline constexpr const char* version_string = "0.1.0";
// Bump when any serialized output (metrics JSON, CSV layout) changes shape.
inline constexpr int metrics_schema_version = 1;

}  // namespace dualgem
