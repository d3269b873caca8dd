#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sara/types.hpp"

namespace sara {

using ClassId = std::int32_t;

/// Empty optional when cfg is a legal tiling of geometry, otherwise the first
/// violated rule.
inline std::optional<std::string> config_violation(const ArrayGeometry& g, const ArrayConfig& c) {
  if (c.part_rows < 1 || c.part_cols < 1 || c.grid_rows < 1 || c.grid_cols < 1) {
    return "partition and grid dimensions must be >= 1";
  }
  if (g.total_rows % c.part_rows != 0) {
    return "partition rows " + std::to_string(c.part_rows) + " do not divide array rows " +
           std::to_string(g.total_rows);
  }
  if (g.total_cols % c.part_cols != 0) {
    return "partition cols " + std::to_string(c.part_cols) + " do not divide array cols " +
           std::to_string(g.total_cols);
  }
  if (c.part_rows % g.cell != 0 || c.part_cols % g.cell != 0) {
    return "partition " + std::to_string(c.part_rows) + "x" + std::to_string(c.part_cols) +
           " is not a multiple of the " + std::to_string(g.cell) + "-wide systolic cell";
  }
  if (c.grid_rows * c.part_rows != g.total_rows || c.grid_cols * c.part_cols != g.total_cols) {
    return "grid " + std::to_string(c.grid_rows) + "x" + std::to_string(c.grid_cols) +
           " of " + std::to_string(c.part_rows) + "x" + std::to_string(c.part_cols) +
           " partitions does not cover the " + std::to_string(g.total_rows) + "x" +
           std::to_string(g.total_cols) + " array";
  }
  return std::nullopt;
}

inline void validate_config(const ArrayGeometry& g, const ArrayConfig& c) {
  validate(g);
  if (auto why = config_violation(g, c)) throw ValidationError(*why);
}

/// Cell multiples that exactly divide `extent`, ascending.
inline std::vector<Count> partition_extents(Count extent, Count cell) {
  std::vector<Count> out;
  for (Count r = cell; r <= extent; r += cell) {
    if (extent % r == 0) out.push_back(r);
  }
  return out;
}

/// Every legal configuration of one physical array, in canonical
/// (part_rows, part_cols, dataflow) order. The position in that order is the
/// class id used by the recommender.
class ConfigSpace {
 public:
  explicit ConfigSpace(ArrayGeometry geometry) : geometry_(geometry) {
    validate(geometry_);
    for (Count r : partition_extents(geometry_.total_rows, geometry_.cell)) {
      for (Count c : partition_extents(geometry_.total_cols, geometry_.cell)) {
        for (Dataflow df : kAllDataflows) {
          configs_.push_back({geometry_.total_rows / r, geometry_.total_cols / c, r, c, df});
        }
      }
    }
  }

  const ArrayGeometry& geometry() const { return geometry_; }
  const std::vector<ArrayConfig>& configs() const { return configs_; }
  std::size_t size() const { return configs_.size(); }
  auto begin() const { return configs_.begin(); }
  auto end() const { return configs_.end(); }

  const ArrayConfig& at(ClassId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= configs_.size()) {
      throw NotFoundError("class id " + std::to_string(id) + " outside configuration space of " +
                          std::to_string(configs_.size()));
    }
    return configs_[static_cast<std::size_t>(id)];
  }

  std::optional<ClassId> find(const ArrayConfig& cfg) const {
    for (std::size_t i = 0; i < configs_.size(); ++i) {
      if (configs_[i] == cfg) return static_cast<ClassId>(i);
    }
    return std::nullopt;
  }

  ClassId class_of(const ArrayConfig& cfg) const {
    if (auto id = find(cfg)) return *id;
    throw NotFoundError("configuration (" + to_string(cfg) + ") is not in the space");
  }

  /// Class id of the monolithic configuration with the given dataflow.
  ClassId monolithic_class(Dataflow df) const {
    return class_of({1, 1, geometry_.total_rows, geometry_.total_cols, df});
  }

  nlohmann::json to_json() const {
    nlohmann::json configs = nlohmann::json::array();
    for (std::size_t i = 0; i < configs_.size(); ++i) {
      const auto& c = configs_[i];
      configs.push_back({{"id", i},
                         {"gr", c.grid_rows},
                         {"gc", c.grid_cols},
                         {"r", c.part_rows},
                         {"c", c.part_cols},
                         {"df", std::string(to_string(c.dataflow))}});
    }
    return {{"geometry",
             {{"rows", geometry_.total_rows},
              {"cols", geometry_.total_cols},
              {"cell", geometry_.cell}}},
            {"configs", configs}};
  }

  /// Rebuilds the space from its geometry and rejects documents whose config
  /// list disagrees with the enumeration.
  static ConfigSpace from_json(const nlohmann::json& j) {
    try {
      const auto& g = j.at("geometry");
      ConfigSpace space({g.at("rows").get<Count>(), g.at("cols").get<Count>(),
                         g.at("cell").get<Count>()});
      if (j.contains("configs")) {
        const auto& cs = j.at("configs");
        if (cs.size() != space.size()) throw FormatError("config count does not match geometry");
        for (const auto& c : cs) {
          ArrayConfig cfg{c.at("gr").get<Count>(), c.at("gc").get<Count>(),
                          c.at("r").get<Count>(), c.at("c").get<Count>(),
                          parse_dataflow(c.at("df").get<std::string>())};
          if (space.at(c.at("id").get<ClassId>()) != cfg) {
            throw FormatError("config id " + c.at("id").dump() + " out of canonical order");
          }
        }
      }
      return space;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed configuration space: ") + e.what());
    }
  }

  /// FNV-1a over the compact canonical JSON form.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json().dump()) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  ArrayGeometry geometry_;
  std::vector<ArrayConfig> configs_;
};

inline ConfigSpace enumerate_configs(const ArrayGeometry& g) { return ConfigSpace(g); }

inline std::string hash_hex(std::uint64_t h) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
  return s;
}

}  // namespace sara
