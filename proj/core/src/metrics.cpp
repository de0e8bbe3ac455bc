#include "dualgem/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "json.hpp"

#include "dualgem/errors.hpp"
#include "dualgem/version.hpp"

namespace dualgem {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string fnv1a64_hex(std::string_view text) {
  static const char digits[] = "0123456789abcdef";
  std::uint64_t hash = fnv1a64(text);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

std::string format_number(double value) {
  if (!std::isfinite(value)) return std::signbit(value) ? "-inf" : "inf";
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string trace_csv(const std::vector<double>& t_us,
                      const std::vector<std::complex<double>>& trace) {
  std::string out = "t_us,re,im,intensity\n";
  const std::size_t n = std::min(t_us.size(), trace.size());
  for (std::size_t k = 0; k < n; ++k) {
    out += format_number(t_us[k]);
    out += ',';
    out += format_number(trace[k].real());
    out += ',';
    out += format_number(trace[k].imag());
    out += ',';
    out += format_number(std::norm(trace[k]));
    out += '\n';
  }
  return out;
}

std::string table_csv(const std::vector<std::string>& headers,
                      const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (i) out += ',';
    out += headers[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != headers.size()) {
      throw NumericalError("table_csv: row width mismatch");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string metrics_document(const std::string& command,
                             const ScenarioConfig& config, std::uint64_t seed,
                             const std::string& metrics_object_json,
                             const std::vector<std::string>& warnings,
                             const std::vector<std::string>& artifacts) {
  using nlohmann::ordered_json;
  ordered_json metrics = ordered_json::parse(metrics_object_json);
  if (!metrics.is_object()) {
    throw NumericalError("metrics_document: metrics payload must be an object");
  }
  ordered_json doc;
  doc["schema_version"] = metrics_schema_version;
  doc["generator"] = std::string("dualgem ") + version_string;
  doc["command"] = command;
  doc["seed"] = seed;
  doc["config_digest"] = config_digest(config);
  doc["config"] = ordered_json::parse(effective_config_json(config));
  doc["metrics"] = metrics;
  doc["warnings"] = warnings;
  doc["artifacts"] = artifacts;
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
  out.flush();
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace dualgem
