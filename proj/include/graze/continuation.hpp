#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "graze/geometry.hpp"
#include "graze/orbits.hpp"

namespace graze {

struct ContinuationConfig {
  double epsilon = 0.1;        // displacement budget for the mover
  double gamma_step = 0.005;
  double min_step = 1e-8;
  double max_step = 0.05;
  double shrink = 0.5;
  double grow = 1.5;
  double grazing_tolerance = 1e-6;
  int max_steps = 2000;
  std::size_t mover = 0;
  std::optional<double> delta;  // initial clearance must be below 1 + delta

  /// Throws DomainError unless epsilon > 0 and 0 < min <= initial <= max.
  void validate() const;
};

enum class Outcome { grazing_at_mover, grazing_elsewhere, step_limit, solver_failure, epsilon_exceeded };

std::string to_string(Outcome o);

struct TraceStep {
  double gamma = 0.0;
  Vec2 c0;
  double h = 0.0;
  double alpha0 = 0.0;
  double ell0_plus = 0.0;
  double ell0_minus = 0.0;
  double h_prime = 0.0;
  double min_margin = 0.0;  // min_k (pi/2 - |alpha_k|)
  double closure = 0.0;
  Vec2 z;
};

/// Where the singularity appeared when the run ends on a grazing outcome.
struct GrazingSite {
  int collision = -1;          // tangential collision, or -1
  int segment = -1;            // segment tangent to a disk, or -1
  std::size_t scatterer = 0;   // the disk it touches
};

struct ContinuationTrace {
  std::vector<TraceStep> steps;
  Outcome outcome = Outcome::step_limit;
  std::string detail;
  BilliardTable initial_table;
  BilliardTable final_table;
  PeriodicOrbit final_orbit;  // mover at collision 0
  std::size_t mover = 0;
  int segment = -1;
  double epsilon = 0.0;
  GrazingSite site;
  bool hypotheses_held = true;  // |alpha_0| < pi/6 at every accepted step
  double realized_delta = 0.0;  // h(0) - 1
  double descent_bound = 0.0;   // L with worst-case m0 - gamma, M0 + gamma at the end
  double min_descent_rate = 0.0;  // min over steps of -(dh/dgamma)

  double gamma() const { return steps.empty() ? 0.0 : steps.back().gamma; }
};

/// Moves the mover toward the near segment, re-solving the orbit, until it
/// grazes or the run fails. Throws PreconditionError if the orbit does not
/// satisfy the hypotheses at the start.
ContinuationTrace run(const BilliardTable& table, const PeriodicOrbit& orbit, const ContinuationConfig& config);

struct Certificate {
  std::string kind;  // "grazing-at-scatterer" or "grazing-elsewhere"
  std::size_t mover = 0;
  std::string sequence;
  double gamma = 0.0;
  double displacement = 0.0;
  double epsilon = 0.0;
  double h = 0.0;
  double closure = 0.0;
  double min_margin = 0.0;
  GrazingSite site;
  std::vector<Vec2> centers;
};

/// Re-verifies the final state. Throws InvalidTraceError if the outcome is
/// not grazing or any recheck fails.
Certificate certify(const ContinuationTrace& trace, double tolerance = 1e-6);

void write_trace_csv(std::ostream& out, const ContinuationTrace& trace);

}  // namespace graze
