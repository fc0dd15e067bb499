#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "graze/gcalc.hpp"
#include "graze/geometry.hpp"
#include "graze/orbits.hpp"

namespace graze {

/// A periodic orbit and its moving scatterer, expressed in the frame where
/// the mover sits at the origin, phi_0 = 0, and the near segment passes on
/// the side that makes h positive.
struct PerturbationSetup {
  BilliardTable table;
  PeriodicOrbit orbit;  // the mover is collision 0
  std::size_t mover = 0;
  int segment = -1;     // k*, the segment passing near the mover
  double h = 0.0;       // clearance; Z - C_0 = h (sin w, -cos w), w = omega_{k*}
  Vec2 z;               // foot point on segment k*
  double theta = 0.0;   // direction of C_0', toward Z
  RigidMotion frame;    // original coordinates -> normalized
};

struct FrameOptions {
  std::size_t mover = 0;
  std::optional<int> segment;          // fixed k*; default: closest interior passage
  std::optional<double> delta;         // require h < 1 + delta
  double alpha_max = kPi / 6;
  bool check_hypotheses = true;
};

/// Throws PreconditionError naming the first unmet hypothesis.
PerturbationSetup normalize_frame(const BilliardTable& table, const PeriodicOrbit& orbit,
                                  const FrameOptions& options = {});

/// (omega_0', omega_{N-1}') under unit-speed motion of C_0 toward Z.
/// Throws DegenerateOrbitError when D vanishes to working precision.
Vec2 solve_u0_prime(const PerturbationSetup& setup, const GContext& ctx);

/// D together with the magnitude of its largest additive term.
Residual d_with_scale(const GContext& ctx);

struct EllLimits {
  double plus = 0.0;
  double minus = 0.0;
};

/// Closed-form ell_0^+ and ell_0^- at the moving collision.
EllLimits ell_limits(const PerturbationSetup& setup, const GContext& ctx);

/// First-order motion of the whole period.
struct WaveFront {
  std::vector<Vec2> u_prime;        // u_k' for k = 0..N (entry N closes the period)
  std::vector<double> phi_prime;    // k = 0..N-1
  std::vector<double> omega_prime;  // segment k
  std::vector<double> ell_start;    // ell at Q_k on segment k (ell_k^+)
  std::vector<double> ell_end;      // ell at Q_{k+1} on segment k (ell_{k+1}^-)
};

WaveFront propagate(const PerturbationSetup& setup, const GContext& ctx);

/// ell at arc length t along segment j.
double ell_at(const WaveFront& wave, int j, double t);
/// ell at a point of the orbit; throws DomainError if P is not on a segment
/// interior.
double ell_at(const PerturbationSetup& setup, const WaveFront& wave, Vec2 p);
double ell_at(const PerturbationSetup& setup, const GContext& ctx, Vec2 p);

/// Rate of change of the clearance h.
double h_prime(const PerturbationSetup& setup, const GContext& ctx);

/// (1/2)(omega_{N-1}' - omega_0').
double alpha0_prime(const Vec2& u0_prime);

struct Bounds {
  double ell = 0.0;    // 1 - m cos a_0 / ((M + 1)(2m + 1))
  double alpha = 0.0;  // 3 / m
};

/// Throws OverlapError for m <= 0.
Bounds bounds(const PerturbationSetup& setup, const GContext& ctx, double m, double M);

struct ResponseReport {
  Vec2 u0_prime;
  double ell0_plus = 0.0;
  double ell0_minus = 0.0;
  double alpha0_prime = 0.0;
  double h_prime = 0.0;
  double ell_z = 0.0;
  double bound_ell = 0.0;
  double bound_alpha = 0.0;
  double d = 0.0;
  double h = 0.0;
  double alpha0 = 0.0;
  double theta = 0.0;
  int segment = -1;
  /// h' < -min(1 - |ell0+|, 1 - |ell0-|)
  bool descent_margin_holds = false;
  /// Same inequality with signed ell0+-.
  bool descent_margin_signed_holds = false;
};

ResponseReport respond(const PerturbationSetup& setup);

}  // namespace graze
