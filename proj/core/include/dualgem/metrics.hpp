#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dualgem/config.hpp"

namespace dualgem {

// FNV-1a 64-bit; used for config digests.
std::uint64_t fnv1a64(std::string_view text);
std::string fnv1a64_hex(std::string_view text);

// Shortest round-trip decimal form; byte-stable for a given IEEE double.
std::string format_number(double value);

// "t_us,re,im,intensity" rows for a complex trace.
std::string trace_csv(const std::vector<double>& t_us,
                      const std::vector<std::complex<double>>& trace);

// Generic numeric table; every row must match the header width.
std::string table_csv(const std::vector<std::string>& headers,
                      const std::vector<std::vector<double>>& rows);

// Full metrics document: schema/version envelope, effective config echo,
// digest, then the caller-built metrics object (JSON text). Deterministic
// byte-for-byte for a given config + seed.
std::string metrics_document(const std::string& command,
                             const ScenarioConfig& config, std::uint64_t seed,
                             const std::string& metrics_object_json,
                             const std::vector<std::string>& warnings = {},
                             const std::vector<std::string>& artifacts = {});

// Throws ConfigError when the path is not writable.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace dualgem
