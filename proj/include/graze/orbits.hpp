#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "graze/collision_map.hpp"
#include "graze/gcalc.hpp"
#include "graze/geometry.hpp"

namespace graze {

/// Cyclic itinerary of scatterer indices. Consecutive entries (including
/// last -> first) differ, and the length is at least 2.
class SymbolSequence {
 public:
  explicit SymbolSequence(std::vector<std::size_t> indices);
  /// "0,1,2" -> {0, 1, 2}.
  static SymbolSequence parse(const std::string& text);

  int size() const { return static_cast<int>(indices_.size()); }
  /// Cyclic access.
  std::size_t operator[](int k) const;
  const std::vector<std::size_t>& indices() const { return indices_; }

  SymbolSequence rotated(int offset) const;
  /// Lexicographically smallest rotation.
  SymbolSequence canonical() const;
  /// False if the sequence is a repetition of a shorter one.
  bool is_primitive() const;
  int count(std::size_t scatterer) const;
  std::string to_string() const;

  friend bool operator==(const SymbolSequence&, const SymbolSequence&) = default;
  friend auto operator<=>(const SymbolSequence& a, const SymbolSequence& b) {
    return a.indices_ <=> b.indices_;
  }

 private:
  std::vector<std::size_t> indices_;
};

struct PeriodicOrbit {
  SymbolSequence sequence;
  std::vector<CollisionState> states;
  std::vector<double> lengths;  // s_k = |Q_{k+1} - Q_k|
  std::vector<double> omega;    // direction angle of segment k
  double closure_residual = 0.0;
  double gradient_norm = 0.0;
  double min_hessian_eigenvalue = 0.0;

  int period() const { return sequence.size(); }
  /// Cyclic accessors.
  const CollisionState& state(int k) const;
  Vec2 point(const BilliardTable& table, int k) const { return state(k).point(table); }
  double length(int k) const;
  double direction(int k) const;
  /// u_k = (omega_k, omega_{k-1}).
  UCoords u(int k) const { return {direction(k), direction(k - 1)}; }
  StepData step(const BilliardTable& table, int k) const;
  GContext g_context() const;
  PeriodicOrbit rotated(int offset) const;
  /// Smallest |pi/2 - |alpha_k||.
  double grazing_margin() const;
};

/// Image of the orbit under a rigid motion of its table.
PeriodicOrbit transform(const PeriodicOrbit& orbit, const RigidMotion& g);

enum class SolveStatus { ok, grazing, inadmissible, no_orbit };

std::string to_string(SolveStatus s);

struct SolveOptions {
  std::vector<double> initial_phi;  // empty: aim each collision at the next center
  double gradient_tolerance = 1e-12;
  int max_iterations = 100;
  int max_halvings = 40;
  bool check_admissibility = true;
};

struct SolveResult {
  SolveStatus status = SolveStatus::no_orbit;
  std::optional<PeriodicOrbit> orbit;
  std::string detail;
  int iterations = 0;

  bool ok() const { return status == SolveStatus::ok; }
};

/// Periodic orbit with the given itinerary, found as the critical point of
/// the total length sum_k |Q_{k+1} - Q_k| over the boundary angles.
SolveResult solve_periodic(const BilliardTable& table, const SymbolSequence& sequence,
                           const SolveOptions& options = {});

/// Total length and its gradient at boundary angles phi; exposed for tests.
double orbit_length(const BilliardTable& table, const SymbolSequence& sequence,
                    const std::vector<double>& phi, std::vector<double>* gradient = nullptr);

/// du_k/du_j from the G-function closed form, 0 <= j < k (indices unrolled).
Jacobian2 multi_step_jacobian(const PeriodicOrbit& orbit, int j, int k);
/// Ordered product dB/du(u_{k-1}) ... dB/du(u_j).
Jacobian2 jacobian_product(const PeriodicOrbit& orbit, const BilliardTable& table, int j, int k);

/// Segment passing closest to `scatterer`, among segments that do not touch it.
struct NearSegment {
  int segment = -1;
  double clearance = 0.0;
  Vec2 foot;
  double t = 0.0;
};

/// Requires `scatterer` to be collision 0 of the orbit; looks at segments
/// 1..N-2 whose closest point to the center is interior.
std::optional<NearSegment> find_near_segment(const BilliardTable& table, const PeriodicOrbit& orbit,
                                             std::size_t scatterer);

struct OrbitFilter {
  std::optional<double> near_delta;         // some segment passes within 1 + delta
  std::optional<std::size_t> single_hit;    // this scatterer is hit exactly once
  std::optional<double> alpha_max;          // |alpha_0| bound at that collision
};

struct EnumeratedOrbit {
  PeriodicOrbit orbit;  // rotated so the single-hit scatterer (if any) is collision 0
  std::optional<NearSegment> near;
  std::size_t near_scatterer = 0;
};

struct Enumeration {
  std::vector<EnumeratedOrbit> accepted;
  std::vector<std::pair<SymbolSequence, SolveStatus>> rejected;
  int filtered_out = 0;
};

/// All admissible primitive orbits of period 2..max_period, one per cyclic
/// class, in canonical sequence order.
Enumeration enumerate_orbits(const BilliardTable& table, int max_period, const OrbitFilter& filter = {});

/// CSV with header k,scatterer,phi,alpha,omega,s.
void write_orbit_csv(std::ostream& out, const PeriodicOrbit& orbit);

/// Reads an orbit CSV and re-solves it on `table`, seeded by the stored
/// angles. Throws ParseError on malformed input or if the stored orbit does
/// not match the re-solved one to 1e-9.
PeriodicOrbit read_orbit_csv(std::istream& in, const BilliardTable& table);

}  // namespace graze
