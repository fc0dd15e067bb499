#include "graze/collision_map.hpp"

#include <string>

#include "graze/errors.hpp"

namespace graze {

namespace {

// Flight from the unit circle at the origin, leaving Q = (cos phi, sin phi)
// along omega_out, onto the unit circle centred at r.
MapResult fly(double phi, double omega_out, Vec2 r) {
  MapResult out;
  const Vec2 q = unit(phi);
  const Vec2 d = unit(omega_out);
  const Vec2 rel = q - r;
  const double b = dot(d, rel);
  const double c = dot(rel, rel) - 1.0;
  const double disc = b * b - c;
  if (disc < 0.0 || b >= 0.0) {
    out.status = MapStatus::miss;
    return out;
  }
  const double t = c / (-b + std::sqrt(disc));  // smaller root, stable near tangency
  const Vec2 p = q + t * d;
  const double phi_next = wrap_angle(angle_of(p - r));
  const double alpha_next = incidence_angle(phi_next, omega_out);
  out.next = AngleState{phi_next, alpha_next};
  out.length = t;
  out.u = UCoords{wrap_angle(phi_next - alpha_next), wrap_angle(omega_out)};
  if (is_grazing(alpha_next)) out.status = MapStatus::grazing;
  return out;
}

void require_regular(const StepData& step, const char* what) {
  if (is_grazing(step.alpha()) || is_grazing(step.alpha_next()))
    throw GrazingError(std::string(what) + ": unbounded Jacobian at a grazing collision");
}

}  // namespace

std::optional<StepData> StepData::from_state(double phi, double alpha, Vec2 displacement) {
  const double omega = wrap_angle(phi - alpha);
  const MapResult r = fly(phi, omega, displacement);
  if (r.status == MapStatus::miss) return std::nullopt;
  return StepData(alpha, r.next.alpha, r.length, omega, displacement);
}

StepData StepData::between(const BilliardTable& table, const CollisionState& from,
                           const CollisionState& to) {
  const Vec2 seg = to.point(table) - from.point(table);
  return StepData(from.alpha, to.alpha, norm(seg), wrap_angle(angle_of(seg)),
                  table.center(to.scatterer) - table.center(from.scatterer));
}

MapResult apply_B(const UCoords& u, Vec2 r) {
  const auto state = from_u(u);
  if (!state) {
    MapResult g;
    g.status = MapStatus::grazing;
    return g;
  }
  return fly(state->phi, u.omega_out, r);
}

MapResult apply_F(double alpha, double phi, Vec2 r) {
  if (is_grazing(alpha)) {
    MapResult g;
    g.status = MapStatus::grazing;
    return g;
  }
  return fly(phi, wrap_angle(phi - alpha), r);
}

Jacobian2 dF_dstate(const StepData& step) {
  require_regular(step, "dF_dstate");
  const double s = step.length();
  const double c0 = std::cos(step.alpha());
  const double c1 = std::cos(step.alpha_next());
  const double sec = 1.0 / c1;
  return -sec * Mat2{{s + c1, -(s + c0 + c1), -s, s + c0}};
}

Jacobian2 dB_du(const StepData& step) {
  require_regular(step, "dB_du");
  const double s = step.length();
  const double c0 = std::cos(step.alpha());
  const double c1 = std::cos(step.alpha_next());
  return -(1.0 / c1) * Mat2{{2.0 * s + c0 + c1, c0, -c1, 0.0}};
}

Jacobian2 dB_dr(const StepData& step) {
  require_regular(step, "dB_dr");
  const double c1 = std::cos(step.alpha_next());
  const double w = step.omega();
  return -(1.0 / c1) * Mat2{{2.0 * std::sin(w), -2.0 * std::cos(w), 0.0, 0.0}};
}

}  // namespace graze
