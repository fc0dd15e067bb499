#pragma once

#include <optional>

#include "graze/geometry.hpp"
#include "graze/vec2.hpp"

namespace graze {

using Jacobian2 = Mat2;

/// Geometry of one free flight between consecutive collisions k and k+1.
///
/// Built only from geometry (a collision state and a displacement), so the
/// triple (s_k, alpha_k, omega_k) is always consistent.
class StepData {
 public:
  /// Follows the outgoing ray of `from` (scatterer at the origin) to the unit
  /// disk centred at `displacement`. Empty if the ray misses that disk.
  static std::optional<StepData> from_state(double phi, double alpha, Vec2 displacement);
  /// Step between two known consecutive collisions on a table.
  static StepData between(const BilliardTable& table, const CollisionState& from,
                          const CollisionState& to);

  double alpha() const { return alpha_; }
  double alpha_next() const { return alpha_next_; }
  double length() const { return length_; }
  double omega() const { return omega_; }
  Vec2 displacement() const { return displacement_; }

 private:
  StepData(double alpha, double alpha_next, double length, double omega, Vec2 displacement)
      : alpha_(alpha), alpha_next_(alpha_next), length_(length), omega_(omega), displacement_(displacement) {}

  double alpha_;
  double alpha_next_;
  double length_;
  double omega_;
  Vec2 displacement_;
};

enum class MapStatus { ok, miss, grazing };

struct MapResult {
  MapStatus status = MapStatus::ok;
  UCoords u;
  AngleState next;  // (phi, alpha) at the new collision
  double length = 0.0;
};

/// The collision map B: u_k -> u_{k+1} onto the disk displaced by r from the
/// current one.
MapResult apply_B(const UCoords& u, Vec2 r);

/// The collision map F_k: (alpha_k, phi_k) -> (alpha_{k+1}, phi_{k+1}).
MapResult apply_F(double alpha, double phi, Vec2 r);

/// d(alpha_{k+1}, phi_{k+1}) / d(alpha_k, phi_k). Throws GrazingError near grazing.
Jacobian2 dF_dstate(const StepData& step);
/// dB/du at (u_k, r_k). Throws GrazingError near grazing.
Jacobian2 dB_du(const StepData& step);
/// dB/dr at (u_k, r_k); columns are the x and y components of r.
Jacobian2 dB_dr(const StepData& step);

/// Linearisation of (alpha, phi) -> u = (phi - alpha, phi + alpha + pi).
inline constexpr Mat2 kStateToU{{-1.0, 1.0, 1.0, 1.0}};

}  // namespace graze
