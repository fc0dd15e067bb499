#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "graze/errors.hpp"
#include "report.hpp"

namespace graze::cli {

/// Bad flags or unusable inputs; the process exits with status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CommonOptions {
  std::optional<std::string> scene;
  std::uint64_t seed = 1;
  std::string out;                    // empty: no files
  std::set<std::string> formats{"csv", "svg", "json-report"};
};

struct FilterOptions {
  int max_period = 4;
  std::optional<double> near_delta;
  bool single_hit_0 = false;
  std::optional<double> alpha0_max;
};

struct VerifyOptions {
  CommonOptions common;
  int trials = 200;
  int max_period = 6;
  bool corrupt_jacobian = false;  // test hook
};

struct OrbitsOptions {
  CommonOptions common;
  FilterOptions filter;
};

/// Picks one orbit: an explicit itinerary, or a row of the orbits listing
/// produced with the same filter flags.
struct SelectOptions {
  FilterOptions filter;
  std::optional<std::string> sequence;
  std::optional<int> orbit_id;
  std::size_t mover = 0;
  std::optional<int> segment;
};

struct PerturbOptions {
  CommonOptions common;
  SelectOptions select;
  double fd_step = 1e-6;
};

struct ContinueOptions {
  CommonOptions common;
  SelectOptions select;
  double epsilon = 0.1;
  double step = 0.005;
  int max_steps = 2000;
};

RunReport cmd_verify(const VerifyOptions& opt);
RunReport cmd_orbits(const OrbitsOptions& opt);
RunReport cmd_perturb(const PerturbOptions& opt);
RunReport cmd_continue(const ContinueOptions& opt);

}  // namespace graze::cli
