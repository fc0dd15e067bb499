#include "report.hpp"

#include <algorithm>
#include <cstdio>

namespace graze::cli {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

bool RunReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

namespace {

nlohmann::ordered_json body(const RunReport& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["seed"] = r.seed;
  j["inputs_digest"] = r.inputs_digest;
  j["pass"] = r.pass();
  auto& cs = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["measured"] = c.measured;
    e["tolerance"] = c.tolerance;
    e["pass"] = c.pass;
    if (!c.detail.empty()) e["detail"] = c.detail;
    cs.push_back(std::move(e));
  }
  j["values"] = r.values;
  j["outputs"] = r.outputs;
  j["notes"] = r.notes;
  return j;
}

}  // namespace

std::string RunReport::digest() const { return hex64(fnv1a(body(*this).dump())); }

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j = body(*this);
  j["report_digest"] = digest();
  return j;
}

}  // namespace graze::cli
