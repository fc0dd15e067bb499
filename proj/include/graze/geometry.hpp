#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graze/vec2.hpp"

namespace graze {

/// |alpha| at or beyond pi/2 - kGrazingTolerance counts as a grazing collision.
inline constexpr double kGrazingTolerance = 1e-7;
/// Tolerance for comparing angles modulo 2*pi.
inline constexpr double kAngleTolerance = 1e-9;

inline bool is_grazing(double alpha) { return std::abs(alpha) >= kPi / 2 - kGrazingTolerance; }

/// Finitely many open unit disks with pairwise disjoint closures.
class BilliardTable {
 public:
  /// Throws OverlapError naming the offending pair if two centers are at
  /// distance <= 2, and InvalidStateError for fewer than two disks.
  explicit BilliardTable(std::vector<Vec2> centers, std::vector<std::string> labels = {});

  std::size_t size() const { return centers_.size(); }
  const Vec2& center(std::size_t i) const { return centers_.at(i); }
  std::span<const Vec2> centers() const { return centers_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Smallest gap between two disk boundaries (the constant m).
  double min_gap() const;
  /// Largest distance between two centers (the constant M).
  double max_center_distance() const;

  /// Copy with one disk moved. Validates like the constructor.
  BilliardTable with_center(std::size_t i, Vec2 c) const;

 private:
  std::vector<Vec2> centers_;
  std::vector<std::string> labels_;
};

/// One collision: Q = C + (cos phi, sin phi), alpha the signed angle of incidence.
struct CollisionState {
  std::size_t scatterer = 0;
  double phi = 0.0;    // [0, 2pi)
  double alpha = 0.0;  // (-pi/2, pi/2)

  Vec2 point(const BilliardTable& table) const { return table.center(scatterer) + unit(phi); }
  Vec2 normal() const { return unit(phi); }
  /// Direction angle of the segment leaving this collision.
  double omega_out() const { return wrap_angle(phi - alpha); }
  /// Direction angle of the segment arriving at this collision.
  double omega_in() const { return wrap_angle(phi + alpha + kPi); }
};

/// u_k = (omega_k, omega_{k-1}): outgoing and incoming direction angles.
struct UCoords {
  double omega_out = 0.0;
  double omega_in = 0.0;
};

struct AngleState {
  double phi = 0.0;
  double alpha = 0.0;
};

UCoords to_u(double phi, double alpha);
inline UCoords to_u(const CollisionState& s) { return to_u(s.phi, s.alpha); }

/// Inverse of to_u. Empty when the implied |alpha| reaches the grazing gate.
std::optional<AngleState> from_u(const UCoords& u);

/// Signed angle of incidence for a ray arriving at the boundary point with
/// outward normal angle phi; values outside (-pi/2, pi/2) mean the ray leaves.
inline double incidence_angle(double phi, double omega_in) { return wrap_signed(omega_in - phi - kPi); }

struct Hit {
  std::size_t scatterer = 0;
  CollisionState state;
  Vec2 point;
  double length = 0.0;
};

/// First disk met by the ray origin + t*direction, t > 0. Empty on escape.
/// The `exclude` disk is ignored (the departing scatterer). Throws
/// InvalidStateError if origin lies strictly inside a disk.
std::optional<Hit> next_collision(const BilliardTable& table, Vec2 origin, Vec2 direction,
                                  std::optional<std::size_t> exclude = std::nullopt);

/// Specular reflection at `state`; empty for a tangential incoming ray.
std::optional<Vec2> reflect(const CollisionState& state, Vec2 incoming);

struct SegmentDistance {
  double distance = 0.0;
  Vec2 foot;
  double t = 0.0;  // foot = p0 + t (p1 - p0), t in [0, 1]
};

SegmentDistance point_segment_distance(Vec2 c, Vec2 p0, Vec2 p1);

struct Clearance {
  double distance = 0.0;  // center-to-segment; grazing iff == 1
  std::size_t scatterer = 0;
  Vec2 foot;
  double t = 0.0;
  bool found = false;  // false when every scatterer is skipped
};

/// Closest disk center to the segment p0-p1 among scatterers not in `skip`.
Clearance segment_clearance(const BilliardTable& table, Vec2 p0, Vec2 p1,
                            std::span<const std::size_t> skip = {});

/// Proper or improper rigid motion x -> R x + t, R a rotation optionally
/// preceded by the reflection (x, y) -> (x, -y).
struct RigidMotion {
  double rotation = 0.0;
  Vec2 translation;
  bool reflect = false;

  Vec2 apply(Vec2 p) const;
  Vec2 apply_direction(Vec2 v) const;
  /// Image of a direction angle (or a boundary angle phi).
  double apply_angle(double a) const;
  /// Signed angles (alpha) flip under reflections.
  double apply_signed(double a) const { return reflect ? -a : a; }
  RigidMotion inverse() const;
  /// this after other.
  RigidMotion compose(const RigidMotion& other) const;
};

BilliardTable transform(const BilliardTable& table, const RigidMotion& g);

/// Scene file: {"centers": [[x, y], ...], "labels": [...]}.
BilliardTable parse_scene(std::string_view json_text);
BilliardTable load_scene(const std::string& path);
std::string scene_to_json(const BilliardTable& table);

}  // namespace graze
