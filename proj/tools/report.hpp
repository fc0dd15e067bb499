#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace graze::cli {

struct CheckLine {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// What every command prints on stdout, whatever else it writes.
struct RunReport {
  std::string command;
  std::uint64_t seed = 0;
  std::string inputs_digest;
  std::vector<CheckLine> checks;
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  std::vector<std::string> outputs;
  std::vector<std::string> notes;

  bool pass() const;
  nlohmann::ordered_json to_json() const;
  /// FNV-1a over the report without its own digest; equal for repeated seeded runs.
  std::string digest() const;
};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace graze::cli
