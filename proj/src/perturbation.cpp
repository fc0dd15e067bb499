#include "graze/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graze/collision_map.hpp"
#include "graze/errors.hpp"

namespace graze {

namespace {

Vec2 segment_normal(double omega) { return {-std::sin(omega), std::cos(omega)}; }

void require(bool ok, const std::string& clause) {
  if (!ok) throw PreconditionError("hypothesis not met: " + clause);
}

}  // namespace

PerturbationSetup normalize_frame(const BilliardTable& table, const PeriodicOrbit& orbit, const FrameOptions& opt) {
  const auto& idx = orbit.sequence.indices();
  const int hits = orbit.sequence.count(opt.mover);
  if (hits == 0 || (opt.check_hypotheses && hits != 1))
    throw PreconditionError("hypothesis not met: scatterer " + std::to_string(opt.mover) +
                            " must be hit exactly once per period (hit " + std::to_string(hits) + " times)");
  const int pos = static_cast<int>(std::find(idx.begin(), idx.end(), opt.mover) - idx.begin());
  const PeriodicOrbit rotated = orbit.rotated(pos);

  const double phi0 = rotated.states[0].phi;
  RigidMotion g{-phi0, {}, false};
  g.translation = -g.apply_direction(table.center(opt.mover));

  auto place = [&](const RigidMotion& frame, PerturbationSetup& s) {
    s.frame = frame;
    s.table = transform(table, frame);
    s.orbit = transform(rotated, frame);
    s.orbit.states[0].phi = 0.0;
  };

  PerturbationSetup s{table, rotated, opt.mover, -1, 0.0, {}, 0.0, {}};
  place(g, s);

  if (opt.segment) {
    s.segment = *opt.segment;
    if (s.segment < 1 || s.segment > s.orbit.period() - 2)
      throw PreconditionError("hypothesis not met: segment " + std::to_string(s.segment) +
                              " must not touch the moving scatterer");
  } else {
    const auto near = find_near_segment(s.table, s.orbit, opt.mover);
    if (!near) throw PreconditionError("hypothesis not met: no segment passes the moving scatterer");
    s.segment = near->segment;
  }

  auto foot = [&] {
    return point_segment_distance(Vec2{}, s.orbit.point(s.table, s.segment), s.orbit.point(s.table, s.segment + 1));
  };
  SegmentDistance d = foot();
  const double signed_h = -dot(segment_normal(s.orbit.direction(s.segment)), d.foot);
  if (signed_h < 0.0) {
    place(RigidMotion{0.0, {}, true}.compose(g), s);
    d = foot();
  }
  s.z = d.foot;
  s.h = norm(d.foot);
  s.theta = wrap_angle(angle_of(d.foot));

  if (opt.check_hypotheses) {
    require(d.t > 0.0 && d.t < 1.0, "the closest point of segment " + std::to_string(s.segment) +
                                         " to the moving scatterer must be interior");
    require(s.h > 1.0, "clearance h = " + std::to_string(s.h) + " must exceed 1");
    if (opt.delta)
      require(s.h < 1.0 + *opt.delta,
              "clearance h = " + std::to_string(s.h) + " must be below 1 + delta = " + std::to_string(1.0 + *opt.delta));
    require(std::abs(s.orbit.states[0].alpha) < opt.alpha_max,
            "|alpha_0| = " + std::to_string(std::abs(s.orbit.states[0].alpha)) + " must be below " +
                std::to_string(opt.alpha_max));
  }
  return s;
}

Residual d_with_scale(const GContext& ctx) {
  const int n = ctx.period();
  const double c0 = ctx.cos_alpha(0);
  const double a = G(ctx, 0, n);
  const double b = c0 * c0 * G(ctx, 1, n - 1);
  const double p = 2.0 * p_tilde(ctx, 0, n);
  return {a - b + p, std::max({std::abs(a), std::abs(b), std::abs(p)})};
}

namespace {

double checked_d(const GContext& ctx) {
  const Residual d = d_with_scale(ctx);
  if (std::abs(d.value) < 1e-8 * d.scale)
    throw DegenerateOrbitError("D = " + std::to_string(d.value) + " vanishes; the orbit is parabolic");
  return d.value;
}

}  // namespace

Vec2 solve_u0_prime(const PerturbationSetup& setup, const GContext& ctx) {
  const int n = ctx.period();
  const double dd = checked_d(ctx);
  const double a0 = ctx.alpha(0);
  const double c0 = ctx.cos_alpha(0);
  const double sp = std::sin(a0 + setup.theta);
  const double sm = std::sin(a0 - setup.theta);
  const double off = c0 * G(ctx, 1, n - 1) - p_tilde(ctx, 1, n);
  const Mat2 m{{G(ctx, 1, n), off, -off, -G(ctx, 0, n - 1)}};
  return (-2.0 / dd) * (m * Vec2{sp, sm});
}

EllLimits ell_limits(const PerturbationSetup& setup, const GContext& ctx) {
  const int n = ctx.period();
  const double dd = checked_d(ctx);
  const double a0 = ctx.alpha(0);
  const double c0 = ctx.cos_alpha(0);
  const double sp = std::sin(a0 + setup.theta);
  const double sm = std::sin(a0 - setup.theta);
  const double pt = p_tilde(ctx, 0, n);
  // Both limits take the minus variants; the plus ones disagree with the
  // re-solved orbit.
  const GVariants full = variants(ctx, 0, n);
  const GVariants left = variants(ctx, 0, n - 1);
  const GVariants right = variants(ctx, 1, n);
  EllLimits l;
  l.plus = ((full.minus_left + pt) * sp + (c0 * left.minus_left + pt) * sm) / dd;
  l.minus = ((c0 * right.minus_right + pt) * sp + (full.minus_right + pt) * sm) / dd;
  return l;
}

WaveFront propagate(const PerturbationSetup& setup, const GContext& ctx) {
  const int n = setup.orbit.period();
  const Vec2 c0_prime = unit(setup.theta);
  WaveFront w;
  auto forcing = [&](int k, const StepData& step) {
    Vec2 f{};
    if (k == 0) f = f + dB_dr(step) * (-1.0 * c0_prime);
    if (k == n - 1) f = f + dB_dr(step) * c0_prime;
    return f;
  };
  // The chain amplifies roundoff along its unstable direction, so each u_k'
  // comes from the nearer end of the period: forward from u_0', or backward
  // from u_N' = u_0'.
  const Vec2 u0 = solve_u0_prime(setup, ctx);
  w.u_prime.assign(n + 1, u0);
  const int half = n / 2;
  for (int k = 0; k < half; ++k) {
    const StepData step = setup.orbit.step(setup.table, k);
    w.u_prime[k + 1] = dB_du(step) * w.u_prime[k] + forcing(k, step);
  }
  for (int k = n - 1; k > half; --k) {
    const StepData step = setup.orbit.step(setup.table, k);
    w.u_prime[k] = dB_du(step).inverse() * (w.u_prime[k + 1] - forcing(k, step));
  }
  for (int k = 0; k < n; ++k) {
    const Vec2 u = w.u_prime[k];
    const double phi_p = 0.5 * (u.x + u.y);
    const double phi = setup.orbit.states[k].phi;
    Vec2 q_prime = phi_p * Vec2{-std::sin(phi), std::cos(phi)};
    if (k == 0) q_prime = q_prime + c0_prime;
    const double om = setup.orbit.omega[k];
    w.phi_prime.push_back(phi_p);
    w.omega_prime.push_back(u.x);
    w.ell_start.push_back(dot(segment_normal(om), q_prime));
    w.ell_end.push_back(w.ell_start.back() + setup.orbit.lengths[k] * u.x);
  }
  return w;
}

double ell_at(const WaveFront& wave, int j, double t) {
  if (j < 0 || j >= static_cast<int>(wave.ell_start.size())) throw DomainError("ell_at: no segment " + std::to_string(j));
  return wave.ell_start[j] + t * wave.omega_prime[j];
}

double ell_at(const PerturbationSetup& setup, const WaveFront& wave, Vec2 p) {
  const int n = setup.orbit.period();
  for (int j = 0; j < n; ++j) {
    const Vec2 a = setup.orbit.point(setup.table, j);
    const Vec2 b = setup.orbit.point(setup.table, j + 1);
    const SegmentDistance d = point_segment_distance(p, a, b);
    if (d.distance < 1e-9 && d.t > 0.0 && d.t < 1.0) return ell_at(wave, j, distance(a, p));
  }
  throw DomainError("ell_at: point is not interior to any segment of the orbit");
}

double ell_at(const PerturbationSetup& setup, const GContext& ctx, Vec2 p) {
  return ell_at(setup, propagate(setup, ctx), p);
}

double h_prime(const PerturbationSetup& setup, const GContext& ctx) {
  const WaveFront w = propagate(setup, ctx);
  const double t = distance(setup.orbit.point(setup.table, setup.segment), setup.z);
  return -1.0 - ell_at(w, setup.segment, t);
}

double alpha0_prime(const Vec2& u0_prime) { return 0.5 * (u0_prime.y - u0_prime.x); }

Bounds bounds(const PerturbationSetup& setup, const GContext& ctx, double m, double M) {
  (void)setup;
  if (!(m > 0.0)) throw OverlapError("minimum gap m = " + std::to_string(m) + " must be positive");
  return {1.0 - m * ctx.cos_alpha(0) / ((M + 1.0) * (2.0 * m + 1.0)), 3.0 / m};
}

ResponseReport respond(const PerturbationSetup& setup) {
  const GContext ctx = setup.orbit.g_context();
  ResponseReport r;
  const WaveFront w = propagate(setup, ctx);
  r.u0_prime = w.u_prime[0];
  const EllLimits l = ell_limits(setup, ctx);
  r.ell0_plus = l.plus;
  r.ell0_minus = l.minus;
  r.alpha0_prime = alpha0_prime(r.u0_prime);
  r.ell_z = ell_at(w, setup.segment, distance(setup.orbit.point(setup.table, setup.segment), setup.z));
  r.h_prime = -1.0 - r.ell_z;
  const Bounds b = bounds(setup, ctx, setup.table.min_gap(), setup.table.max_center_distance());
  r.bound_ell = b.ell;
  r.bound_alpha = b.alpha;
  r.d = d_with_scale(ctx).value;
  r.h = setup.h;
  r.alpha0 = setup.orbit.states[0].alpha;
  r.theta = setup.theta;
  r.segment = setup.segment;
  r.descent_margin_holds = r.h_prime < -std::min(1.0 - std::abs(l.plus), 1.0 - std::abs(l.minus));
  r.descent_margin_signed_holds = r.h_prime < -std::min(1.0 - l.plus, 1.0 - l.minus);
  return r;
}

}  // namespace graze
