#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sara/types.hpp"

namespace sara::io {

/// Writes `contents` next to `path` and renames it into place, so readers
/// never observe a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move " + tmp.string() + " to " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline Count parse_count(std::string_view s, std::string_view what) {
  s = trim(s);
  Count v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) {
    throw FormatError("invalid integer for " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

/// Parses a headed CSV, checking the header matches `expected` exactly.
/// Blank lines are skipped.
inline std::vector<std::vector<std::string>> read_csv(std::string_view text,
                                                      const std::vector<std::string>& expected,
                                                      std::string_view source) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(trim(line), ',');
    for (auto& f : fields) f = std::string(trim(f));
    if (header) {
      if (fields != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw FormatError(std::string(source) + ": expected header '" + want + "'");
      }
      header = false;
      continue;
    }
    if (fields.size() != expected.size()) {
      throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(expected.size()) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  if (header) throw FormatError(std::string(source) + ": missing header");
  return rows;
}

/// Shortest round-trippable text for a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = 0;
  for (int prec = 6; prec < 17; ++prec) {
    char tmp[32];
    std::snprintf(tmp, sizeof tmp, "%.*g", prec, v);
    std::sscanf(tmp, "%lf", &back);
    if (back == v) return tmp;
  }
  return buf;
}

/// Reads {e_mac, e_read, e_write, p_leak}; missing keys keep their defaults.
inline EnergyParams energy_params_from_json(const nlohmann::json& j) {
  EnergyParams p;
  try {
    if (!j.is_object()) throw FormatError("energy config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "e_mac") p.e_mac = value.get<double>();
      else if (key == "e_read") p.e_read = value.get<double>();
      else if (key == "e_write") p.e_write = value.get<double>();
      else if (key == "p_leak") p.p_leak = value.get<double>();
      else throw FormatError("unknown energy parameter '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed energy config: ") + e.what());
  }
  validate(p);
  return p;
}

inline EnergyParams read_energy_params(const std::filesystem::path& path) {
  try {
    return energy_params_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace sara::io
