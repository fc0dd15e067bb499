#include "oracles.hpp"

#include <boost/multiprecision/float128.hpp>

#include <array>
#include <cmath>
#include <stdexcept>

#include "graze/errors.hpp"

namespace graze::oracle {

namespace {

using quad = boost::multiprecision::float128;

const quad kQuadPi = boost::multiprecision::acos(quad(-1));

quad wrap_q(quad a) {
  const quad two_pi = 2 * kQuadPi;
  return a - two_pi * boost::multiprecision::round(a / two_pi);
}

// Flight from (cos phi, sin phi) along omega to the unit circle at r.
// Returns (phi_next, alpha_next).
std::array<quad, 2> fly_q(quad phi, quad omega, quad rx, quad ry) {
  using boost::multiprecision::atan2;
  using boost::multiprecision::cos;
  using boost::multiprecision::sin;
  using boost::multiprecision::sqrt;
  const quad qx = cos(phi) - rx;
  const quad qy = sin(phi) - ry;
  const quad dx = cos(omega);
  const quad dy = sin(omega);
  const quad b = dx * qx + dy * qy;
  const quad c = qx * qx + qy * qy - 1;
  const quad disc = b * b - c;
  if (disc < 0) throw std::runtime_error("oracle flight misses the target disk");
  const quad t = -b - sqrt(disc);
  const quad px = qx + t * dx;
  const quad py = qy + t * dy;
  const quad phi1 = atan2(py, px);
  return {phi1, wrap_q(omega - phi1 - kQuadPi)};
}

// F: (alpha, phi) -> (alpha', phi').
std::array<quad, 2> map_F(const std::array<quad, 2>& x, quad rx, quad ry) {
  const auto [phi1, a1] = fly_q(x[1], x[1] - x[0], rx, ry);
  return {a1, phi1};
}

// B: (w_out, w_in) -> (w_out', w_in').
std::array<quad, 2> map_B(const std::array<quad, 2>& u, quad rx, quad ry) {
  const quad alpha = wrap_q(u[1] - u[0] - kQuadPi) / 2;
  const quad phi = u[0] + alpha;
  const auto [phi1, a1] = fly_q(phi, u[0], rx, ry);
  return {phi1 - a1, u[0]};
}

template <class Fn>
Mat2 central(const Fn& f, const std::array<quad, 2>& x0, double h) {
  Mat2 j;
  for (int c = 0; c < 2; ++c) {
    std::array<quad, 2> xp = x0, xm = x0;
    xp[c] += quad(h);
    xm[c] -= quad(h);
    const auto fp = f(xp);
    const auto fm = f(xm);
    for (int r = 0; r < 2; ++r) j(r, c) = static_cast<double>(wrap_q(fp[r] - fm[r]) / (2 * quad(h)));
  }
  return j;
}

}  // namespace

Mat2 fd_dF_dstate(double phi, double alpha, Vec2 r, double h) {
  return central([&](const std::array<quad, 2>& x) { return map_F(x, quad(r.x), quad(r.y)); },
                 {quad(alpha), quad(phi)}, h);
}

Mat2 fd_dB_du(double phi, double alpha, Vec2 r, double h) {
  const quad a(alpha), p(phi);
  return central([&](const std::array<quad, 2>& u) { return map_B(u, quad(r.x), quad(r.y)); },
                 {p - a, p + a + kQuadPi}, h);
}

Mat2 fd_dB_dr(double phi, double alpha, Vec2 r, double h) {
  const quad a(alpha), p(phi);
  const std::array<quad, 2> u{p - a, p + a + kQuadPi};
  return central([&](const std::array<quad, 2>& rr) { return map_B(u, rr[0], rr[1]); }, {quad(r.x), quad(r.y)}, h);
}

RandomStep random_step(Rng& rng, double max_alpha) {
  for (;;) {
    RandomStep st;
    st.phi = rng.uniform(0.0, kTwoPi);
    st.alpha = rng.uniform(-max_alpha, max_alpha);
    const double omega = st.phi - st.alpha;
    const double s = rng.uniform(0.2, 6.0);
    const Vec2 hit = unit(st.phi) + s * unit(omega);
    const double a1 = rng.uniform(-max_alpha, max_alpha);
    // Incoming direction omega, incidence a1: outward normal at omega - a1 - pi.
    st.r = hit - unit(omega - a1 - kPi);
    if (norm(st.r) > 2.05) return st;
  }
}

GContext random_gcontext(Rng& rng, int max_period) {
  const int n = rng.integer(2, max_period);
  std::vector<double> s(n), a(n);
  for (int k = 0; k < n; ++k) {
    s[k] = rng.uniform(0.05, 8.0);
    a[k] = rng.uniform(-1.45, 1.45);
  }
  return GContext(s, a);
}

RigidMotion random_motion(Rng& rng) {
  RigidMotion g;
  g.rotation = rng.uniform(0.0, kTwoPi);
  g.translation = {rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
  g.reflect = rng.uniform() < 0.5;
  return g;
}

namespace {

std::optional<BilliardTable> random_table(Rng& rng, int k, double box, double min_distance) {
  std::vector<Vec2> c;
  for (int tries = 0; tries < 1000 && static_cast<int>(c.size()) < k; ++tries) {
    const Vec2 p{rng.uniform(-box, box), rng.uniform(-box, box)};
    bool ok = true;
    for (const auto& q : c) ok = ok && distance(p, q) >= min_distance;
    if (ok) c.push_back(p);
  }
  if (static_cast<int>(c.size()) < k) return std::nullopt;
  return BilliardTable(c);
}

}  // namespace

Scene random_near_graze_scene(Rng& rng) {
  for (;;) {
    const int k = rng.integer(4, 6);
    auto table = random_table(rng, k, 5.0, 2.05);
    if (!table) continue;
    const int n = rng.integer(3, 6);
    std::vector<std::size_t> seq{0};
    while (static_cast<int>(seq.size()) < n) {
      const auto i = static_cast<std::size_t>(rng.integer(1, k - 1));
      if (i != seq.back()) seq.push_back(i);
    }
    const SolveResult r = solve_periodic(*table, SymbolSequence(seq));
    if (!r.ok()) continue;
    if (!(std::abs(r.orbit->states[0].alpha) < kPi / 6)) continue;
    const auto near = find_near_segment(*table, *r.orbit, 0);
    if (!near || !(near->clearance > 1.0 && near->clearance < 1.3)) continue;
    try {
      FrameOptions fo;
      fo.delta = 0.3;
      PerturbationSetup s = normalize_frame(*table, *r.orbit, fo);
      if (std::abs(d_with_scale(s.orbit.g_context()).relative()) < 1e-6) continue;
      return Scene{*table, *r.orbit, std::move(s)};
    } catch (const Error&) {
      continue;
    }
  }
}

namespace {

BilliardTable constructed_table(double y) { return BilliardTable({{0.0, 0.0}, {4.5, 0.0}, {-5.0, y}, {4.5, 3.0}}); }

double constructed_h(double y, PeriodicOrbit* out = nullptr) {
  const BilliardTable t = constructed_table(y);
  SolveOptions opt;
  opt.check_admissibility = false;
  const SolveResult r = solve_periodic(t, SymbolSequence({0, 1, 2, 3}), opt);
  if (!r.orbit || r.status != SolveStatus::ok) throw std::runtime_error("constructed scene lost its orbit");
  if (out) *out = *r.orbit;
  return point_segment_distance(t.center(0), r.orbit->point(t, 1), r.orbit->point(t, 2)).distance;
}

}  // namespace

Scene constructed_near_graze(double h) {
  // Secant on the height of disk 2; the clearance is monotone in y here.
  double a = 2.0, b = 3.0;
  double fa = constructed_h(a) - h, fb = constructed_h(b) - h;
  for (int i = 0; i < 60 && std::abs(fb) > 1e-15; ++i) {
    const double c = b - fb * (b - a) / (fb - fa);
    a = b;
    fa = fb;
    b = c;
    fb = constructed_h(b) - h;
  }
  PeriodicOrbit orbit{SymbolSequence({0, 1}), {}, {}, {}};
  constructed_h(b, &orbit);
  const BilliardTable t = constructed_table(b);
  FrameOptions fo;
  fo.delta = 0.1;
  PerturbationSetup s = normalize_frame(t, orbit, fo);
  return Scene{t, orbit, std::move(s)};
}

std::pair<BilliardTable, PeriodicOrbit> random_orbit(Rng& rng, int max_period) {
  for (;;) {
    const int k = rng.integer(3, 6);
    auto table = random_table(rng, k, 6.0, 2.1);
    if (!table) continue;
    const int n = rng.integer(2, max_period);
    std::vector<std::size_t> seq;
    while (static_cast<int>(seq.size()) < n) {
      const auto i = static_cast<std::size_t>(rng.integer(0, k - 1));
      if (!seq.empty() && i == seq.back()) continue;
      if (static_cast<int>(seq.size()) == n - 1 && i == seq.front()) continue;
      seq.push_back(i);
    }
    const SolveResult r = solve_periodic(*table, SymbolSequence(seq));
    if (r.ok()) return {*table, *r.orbit};
  }
}

Moved move_and_resolve(const PerturbationSetup& setup, double step) {
  const Vec2 c0 = setup.table.center(setup.mover) + step * unit(setup.theta);
  BilliardTable t = setup.table.with_center(setup.mover, c0);
  SolveOptions opt;
  opt.check_admissibility = false;
  for (const auto& s : setup.orbit.states) opt.initial_phi.push_back(s.phi);
  const SolveResult r = solve_periodic(t, setup.orbit.sequence, opt);
  if (!r.orbit || r.status == SolveStatus::no_orbit) throw std::runtime_error("re-solve failed: " + r.detail);
  return {t, *r.orbit};
}

namespace {

double clearance(const Moved& m, const PerturbationSetup& setup) {
  return point_segment_distance(m.table.center(setup.mover), m.orbit.point(m.table, setup.segment),
                                m.orbit.point(m.table, setup.segment + 1))
      .distance;
}

}  // namespace

FdResponse fd_response(const PerturbationSetup& setup, double step) {
  const Moved p = move_and_resolve(setup, step);
  const Moved m = move_and_resolve(setup, -step);
  const int n = setup.orbit.period();
  const double two = 2.0 * step;
  FdResponse r;
  r.u0_prime = {angle_diff(p.orbit.omega[0], m.orbit.omega[0]) / two,
                angle_diff(p.orbit.omega[n - 1], m.orbit.omega[n - 1]) / two};
  const Vec2 dq = (1.0 / two) * (p.orbit.point(p.table, 0) - m.orbit.point(m.table, 0));
  const auto normal = [](double w) { return Vec2{-std::sin(w), std::cos(w)}; };
  r.ell0_plus = dot(normal(setup.orbit.omega[0]), dq);
  r.ell0_minus = dot(normal(setup.orbit.omega[n - 1]), dq);
  r.h_prime = (clearance(p, setup) - clearance(m, setup)) / two;
  r.alpha0_prime = (p.orbit.states[0].alpha - m.orbit.states[0].alpha) / two;
  return r;
}

double fd_ell(const PerturbationSetup& setup, int j, double t, double step) {
  const Vec2 base = setup.orbit.point(setup.table, j);
  const double w = setup.orbit.omega[j];
  const Vec2 p = base + t * unit(w);
  const Vec2 nrm{-std::sin(w), std::cos(w)};
  auto offset = [&](const Moved& mv) {
    const Vec2 q = mv.orbit.point(mv.table, j);
    const Vec2 e = unit(mv.orbit.omega[j]);
    return cross(e, q - p) / cross(e, nrm);
  };
  return (offset(move_and_resolve(setup, step)) - offset(move_and_resolve(setup, -step))) / (2.0 * step);
}

namespace {

struct Assembled {
  Mat2 lhs;
  Vec2 rhs;
};

Assembled assemble(const PerturbationSetup& setup) {
  const int n = setup.orbit.period();
  std::vector<Mat2> du;
  std::vector<Mat2> dr;
  for (int k = 0; k < n; ++k) {
    const StepData st = setup.orbit.step(setup.table, k);
    du.push_back(dB_du(st));
    dr.push_back(dB_dr(st));
  }
  auto prod = [&](int j, int k) {
    Mat2 p = Mat2::identity();
    for (int i = j; i < k; ++i) p = du[i] * p;
    return p;
  };
  const Vec2 r0 = -1.0 * unit(setup.theta);
  return {Mat2::identity() - prod(0, n), (prod(1, n) * dr[0] - dr[n - 1]) * r0};
}

}  // namespace

Vec2 assembled_u0_prime(const PerturbationSetup& setup) {
  const Assembled a = assemble(setup);
  return a.lhs.inverse() * a.rhs;
}

double assembled_residual(const PerturbationSetup& setup, Vec2 u0_prime) {
  const Assembled a = assemble(setup);
  const Vec2 res = a.lhs * u0_prime - a.rhs;
  const Vec2 lhs = a.lhs * u0_prime;
  const double scale = std::max({a.lhs.max_abs() * std::max(std::abs(u0_prime.x), std::abs(u0_prime.y)),
                                 std::abs(a.rhs.x), std::abs(a.rhs.y), std::abs(lhs.x), std::abs(lhs.y), 1e-300});
  return std::max(std::abs(res.x), std::abs(res.y)) / scale;
}

}  // namespace graze::oracle
