#include "graze/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "graze/errors.hpp"
#include "graze/perturbation.hpp"

namespace graze {

void ContinuationConfig::validate() const {
  if (!(epsilon > 0.0)) throw DomainError("continuation: epsilon must be positive");
  if (!(min_step > 0.0 && min_step <= gamma_step && gamma_step <= max_step))
    throw DomainError("continuation: need 0 < min_step <= gamma_step <= max_step");
  if (!(shrink > 0.0 && shrink < 1.0) || !(grow >= 1.0)) throw DomainError("continuation: bad step factors");
  if (!(grazing_tolerance > 0.0)) throw DomainError("continuation: grazing tolerance must be positive");
  if (max_steps < 1) throw DomainError("continuation: max_steps must be positive");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::grazing_at_mover: return "grazing-at-scatterer-0";
    case Outcome::grazing_elsewhere: return "grazing-elsewhere";
    case Outcome::step_limit: return "step-limit";
    case Outcome::solver_failure: return "solver-failure";
    case Outcome::epsilon_exceeded: return "epsilon-exceeded";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distances to every singular configuration of a solved orbit.
struct Events {
  double h = 0.0;
  Vec2 z;
  double to_mover = kInf;  // h - 1
  double other = kInf;     // smallest other margin
  GrazingSite site;        // where `other` is attained
  double min_margin = kInf;

  double worst() const { return std::min(to_mover, other); }
};

Events measure(const BilliardTable& table, const PeriodicOrbit& orbit, std::size_t mover, int segment) {
  Events e;
  const int n = orbit.period();
  const SegmentDistance d =
      point_segment_distance(table.center(mover), orbit.point(table, segment), orbit.point(table, segment + 1));
  e.h = d.distance;
  e.z = d.foot;
  e.to_mover = d.distance - 1.0;
  for (int k = 0; k < n; ++k) {
    const double m = kPi / 2 - std::abs(orbit.states[k].alpha);
    e.min_margin = std::min(e.min_margin, m);
    if (m < e.other) {
      e.other = m;
      e.site = GrazingSite{k, -1, orbit.sequence[k]};
    }
  }
  for (int k = 0; k < n; ++k) {
    const Vec2 p0 = orbit.point(table, k);
    const Vec2 p1 = orbit.point(table, k + 1);
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (i == orbit.sequence[k] || i == orbit.sequence[k + 1]) continue;
      if (k == segment && i == mover) continue;
      const double m = point_segment_distance(table.center(i), p0, p1).distance - 1.0;
      if (m < e.other) {
        e.other = m;
        e.site = GrazingSite{-1, k, i};
      }
    }
  }
  return e;
}

struct Probe {
  BilliardTable table;
  PeriodicOrbit orbit;
  Events events;
};

std::optional<Probe> probe(const BilliardTable& table, const PeriodicOrbit& seed, std::size_t mover, int segment,
                           Vec2 c0) {
  BilliardTable moved = table.with_center(mover, c0);
  SolveOptions opt;
  opt.check_admissibility = false;
  opt.initial_phi.reserve(seed.states.size());
  for (const auto& s : seed.states) opt.initial_phi.push_back(s.phi);
  SolveResult r = solve_periodic(moved, seed.sequence, opt);
  if (r.status == SolveStatus::no_orbit || !r.orbit || !(r.orbit->closure_residual < 1e-10)) return std::nullopt;
  Events ev = measure(moved, *r.orbit, mover, segment);
  return Probe{std::move(moved), std::move(*r.orbit), ev};
}

TraceStep record(const Probe& p, double gamma, std::size_t mover, int segment) {
  TraceStep t;
  t.gamma = gamma;
  t.c0 = p.table.center(mover);
  t.h = p.events.h;
  t.z = p.events.z;
  t.alpha0 = p.orbit.states[0].alpha;
  t.min_margin = p.events.min_margin;
  t.closure = p.orbit.closure_residual;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t.ell0_plus = t.ell0_minus = t.h_prime = nan;
  try {
    FrameOptions fo;
    fo.mover = mover;
    fo.segment = segment;
    fo.check_hypotheses = false;
    const ResponseReport r = respond(normalize_frame(p.table, p.orbit, fo));
    t.ell0_plus = r.ell0_plus;
    t.ell0_minus = r.ell0_minus;
    t.h_prime = r.h_prime;
  } catch (const Error&) {
    // Too close to a singular configuration for the first-order response.
  }
  return t;
}

}  // namespace

ContinuationTrace run(const BilliardTable& table, const PeriodicOrbit& orbit, const ContinuationConfig& cfg) {
  cfg.validate();
  FrameOptions fo;
  fo.mover = cfg.mover;
  fo.delta = cfg.delta;
  const PerturbationSetup setup = normalize_frame(table, orbit, fo);
  const int segment = setup.segment;

  const auto& idx = orbit.sequence.indices();
  const int pos = static_cast<int>(std::find(idx.begin(), idx.end(), cfg.mover) - idx.begin());
  PeriodicOrbit start = orbit.rotated(pos);

  ContinuationTrace trace{{}, Outcome::step_limit, {}, table, table, start, cfg.mover, segment, cfg.epsilon, {}};
  Probe cur{table, start, measure(table, start, cfg.mover, segment)};
  trace.steps.push_back(record(cur, 0.0, cfg.mover, segment));
  trace.realized_delta = cur.events.h - 1.0;
  const double tol = cfg.grazing_tolerance;
  const double m0 = table.min_gap();
  const double big_m0 = table.max_center_distance();

  auto finish = [&](Outcome o, std::string detail) {
    trace.outcome = o;
    trace.detail = std::move(detail);
    trace.final_table = cur.table;
    trace.final_orbit = cur.orbit;
    const double g = trace.gamma();
    const double m = m0 - g;
    const double big_m = big_m0 + g;
    trace.descent_bound = m > 0.0 ? std::sqrt(3.0) * m / (2.0 * (big_m + 1.0) * (2.0 * m + 1.0)) : 0.0;
    double rate = kInf;
    for (std::size_t i = 1; i < trace.steps.size(); ++i) {
      const auto& a = trace.steps[i - 1];
      const auto& b = trace.steps[i];
      rate = std::min(rate, -(b.h - a.h) / (b.gamma - a.gamma));
    }
    trace.min_descent_rate = std::isfinite(rate) ? rate : 0.0;
    return trace;
  };

  auto accept = [&](Probe&& p, double gamma) {
    cur = std::move(p);
    trace.steps.push_back(record(cur, gamma, cfg.mover, segment));
    if (!(std::abs(cur.orbit.states[0].alpha) < kPi / 6)) trace.hypotheses_held = false;
  };

  auto grazing_outcome = [&]() {
    if (cur.events.to_mover <= cur.events.other) {
      trace.site = GrazingSite{-1, segment, cfg.mover};
      return finish(Outcome::grazing_at_mover, "segment " + std::to_string(segment) + " is tangent to the mover");
    }
    trace.site = cur.events.site;
    return finish(Outcome::grazing_elsewhere,
                  trace.site.collision >= 0
                      ? "collision " + std::to_string(trace.site.collision) + " is tangential"
                      : "segment " + std::to_string(trace.site.segment) + " is tangent to scatterer " +
                            std::to_string(trace.site.scatterer));
  };

  if (std::abs(cur.events.worst()) <= tol) return grazing_outcome();

  double step = cfg.gamma_step;
  for (int iter = 0; iter < cfg.max_steps; ++iter) {
    const double gamma = trace.gamma();
    const double room = cfg.epsilon - gamma;
    if (room <= 0.0) return finish(Outcome::epsilon_exceeded, "displacement budget used up before grazing");

    const Vec2 c0 = cur.table.center(cfg.mover);
    const Vec2 dir = normalized(cur.events.z - c0);
    const double hp = trace.steps.back().h_prime;
    double delta = std::min(step, room);
    bool landing = false;
    if (std::isfinite(hp) && hp < 0.0) {
      const double newton = cur.events.to_mover / (-hp);
      if (newton <= delta) {
        delta = newton;
        landing = true;
      }
    }

    std::optional<Probe> p = probe(cur.table, cur.orbit, cfg.mover, segment, c0 + delta * dir);
    if (!p) {
      step = delta * cfg.shrink;
      if (step < cfg.min_step) return finish(Outcome::solver_failure, "re-solve failed below the minimum step");
      continue;
    }

    if (p->events.worst() < -tol) {
      // Overshot a singular configuration: regula falsi (Illinois) on the step length.
      double lo = 0.0, f_lo = cur.events.worst();
      double hi = delta, f_hi = p->events.worst();
      int side = 0;
      std::optional<Probe> landed;
      for (int it = 0; it < 200 && !landed; ++it) {
        double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if (!(mid > lo && mid < hi) || hi - lo < 1e-15) mid = 0.5 * (lo + hi);
        std::optional<Probe> q = probe(cur.table, cur.orbit, cfg.mover, segment, c0 + mid * dir);
        const double f = q ? q->events.worst() : -kInf;
        if (q && std::abs(f) <= tol) {
          landed = std::move(q);
          delta = mid;
        } else if (f > 0.0) {
          lo = mid;
          f_lo = f;
          if (side == -1) f_hi *= 0.5;
          side = -1;
        } else {
          hi = mid;
          f_hi = std::isfinite(f) ? f : -1.0;
          if (side == 1) f_lo *= 0.5;
          side = 1;
        }
      }
      if (!landed) return finish(Outcome::solver_failure, "could not land on the grazing configuration");
      accept(std::move(*landed), gamma + delta);
      return grazing_outcome();
    }

    if (!(p->events.h < cur.events.h)) {
      step = delta * cfg.shrink;
      if (step < cfg.min_step) return finish(Outcome::solver_failure, "clearance stopped decreasing");
      continue;
    }

    accept(std::move(*p), gamma + delta);
    if (cur.events.worst() <= tol) return grazing_outcome();
    if (!landing) step = std::min(step * cfg.grow, cfg.max_step);
  }
  return finish(Outcome::step_limit, "step limit reached");
}

Certificate certify(const ContinuationTrace& trace, double tolerance) {
  if (trace.outcome != Outcome::grazing_at_mover && trace.outcome != Outcome::grazing_elsewhere)
    throw InvalidTraceError("trace ended with " + to_string(trace.outcome) + ", not a grazing outcome");

  SolveOptions opt;
  opt.check_admissibility = false;
  for (const auto& s : trace.final_orbit.states) opt.initial_phi.push_back(s.phi);
  const SolveResult r = solve_periodic(trace.final_table, trace.final_orbit.sequence, opt);
  if (!r.orbit || r.status == SolveStatus::no_orbit)
    throw InvalidTraceError("final periodic orbit does not re-solve: " + r.detail);
  const PeriodicOrbit& o = *r.orbit;
  if (!(o.closure_residual < 1e-10))
    throw InvalidTraceError("final orbit closure residual " + std::to_string(o.closure_residual) + " too large");

  const Events ev = measure(trace.final_table, o, trace.mover, trace.segment);
  Certificate c;
  c.mover = trace.mover;
  c.sequence = o.sequence.to_string();
  c.gamma = trace.gamma();
  c.displacement = distance(trace.final_table.center(trace.mover), trace.initial_table.center(trace.mover));
  c.epsilon = trace.epsilon;
  c.h = ev.h;
  c.closure = o.closure_residual;
  c.min_margin = ev.min_margin;
  c.site = trace.site;
  c.centers.assign(trace.final_table.centers().begin(), trace.final_table.centers().end());

  if (trace.outcome == Outcome::grazing_at_mover) {
    c.kind = "grazing-at-scatterer";
    if (!(std::abs(ev.h - 1.0) < tolerance))
      throw InvalidTraceError("final clearance h = " + std::to_string(ev.h) + " is not 1 within tolerance");
  } else {
    c.kind = "grazing-elsewhere";
    if (!(std::abs(ev.other) < tolerance))
      throw InvalidTraceError("no tangency within tolerance at the reported site");
  }
  if (!(c.gamma <= trace.epsilon + 1e-15 && c.displacement <= trace.epsilon + 1e-15))
    throw InvalidTraceError("displacement exceeds the budget epsilon");
  return c;
}

void write_trace_csv(std::ostream& out, const ContinuationTrace& trace) {
  const auto old = out.precision(17);
  out << "step,gamma,c0_x,c0_y,h,alpha0,ell0_plus,ell0_minus,h_prime,min_margin,closure\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out << i << ',' << s.gamma << ',' << s.c0.x << ',' << s.c0.y << ',' << s.h << ',' << s.alpha0 << ','
        << s.ell0_plus << ',' << s.ell0_minus << ',' << s.h_prime << ',' << s.min_margin << ',' << s.closure << '\n';
  }
  out.precision(old);
}

}  // namespace graze
