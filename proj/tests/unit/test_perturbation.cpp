#include <cmath>

#include "doctest.h"
#include "graze/errors.hpp"
#include "graze/perturbation.hpp"
#include "oracles.hpp"
#include "suite.hpp"

using namespace graze;
using namespace graze::oracle;

namespace {

const Scene& constructed() {
  static const Scene s = constructed_near_graze(1.03);
  return s;
}

}  // namespace

TEST_SUITE("perturbation") {
  TEST_CASE("normalized frame") {
    const PerturbationSetup& s = constructed().setup;
    CHECK(norm(s.table.center(0)) < 1e-14);
    CHECK(s.orbit.states[0].phi == 0.0);
    CHECK(s.h == doctest::Approx(1.03).epsilon(1e-12));
    CHECK(s.segment == 1);
    CHECK(std::abs(s.orbit.states[0].alpha) < kPi / 6);
    // Z lies on the normal (sin w, -cos w) side of the near segment.
    const double w = s.orbit.direction(s.segment);
    CHECK(distance(s.z, s.h * Vec2{std::sin(w), -std::cos(w)}) < 1e-12);
    CHECK(std::abs(angle_diff(s.theta, angle_of(s.z))) < 1e-15);
  }

  TEST_CASE("normalizing twice is the identity") {
    const PerturbationSetup& s = constructed().setup;
    FrameOptions fo;
    const PerturbationSetup again = normalize_frame(s.table, s.orbit, fo);
    CHECK(std::abs(angle_diff(again.frame.rotation, 0.0)) < 1e-15);
    CHECK(norm(again.frame.translation) < 1e-15);
    CHECK_FALSE(again.frame.reflect);
  }

  TEST_CASE("a mirrored scene is reflected back") {
    const Scene& sc = constructed();
    const RigidMotion mirror{0.0, {}, true};
    const PeriodicOrbit mo = transform(sc.setup.orbit, mirror);
    const PerturbationSetup s = normalize_frame(transform(sc.setup.table, mirror), mo);
    CHECK(s.frame.reflect);
    CHECK(s.h == doctest::Approx(sc.setup.h).epsilon(1e-12));
    for (int k = 0; k < s.orbit.period(); ++k) CHECK(s.orbit.states[k].alpha == doctest::Approx(-mo.states[k].alpha));
  }

  TEST_CASE("hypotheses are enforced") {
    const Scene& sc = constructed();
    FrameOptions fo;
    fo.delta = 0.01;
    CHECK_THROWS_AS(normalize_frame(sc.table, sc.orbit, fo), PreconditionError);
    fo = {};
    fo.alpha_max = 0.1;
    CHECK_THROWS_AS(normalize_frame(sc.table, sc.orbit, fo), PreconditionError);
    fo = {};
    fo.segment = 0;
    CHECK_THROWS_AS(normalize_frame(sc.table, sc.orbit, fo), PreconditionError);

    const BilliardTable t({{0, 0}, {4, 0}, {2, 4}});
    const PeriodicOrbit twice = *solve_periodic(t, SymbolSequence({0, 1, 0, 2})).orbit;
    try {
      normalize_frame(t, twice);
      FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()).find("exactly once") != std::string::npos);
    }
  }

  TEST_CASE("zero forcing") {
    PerturbationSetup s = constructed().setup;
    s.theta = 0.0;
    std::vector<double> len = s.orbit.lengths, alpha;
    for (const auto& st : s.orbit.states) alpha.push_back(st.alpha);
    alpha[0] = 0.0;
    const GContext ctx(len, alpha);
    const Vec2 u = solve_u0_prime(s, ctx);
    CHECK(u.x == 0.0);
    CHECK(u.y == 0.0);
    const EllLimits l = ell_limits(s, ctx);
    CHECK(l.plus == 0.0);
    CHECK(l.minus == 0.0);
  }

  TEST_CASE("constructed scene against re-solve differences") {
    const PerturbationSetup& s = constructed().setup;
    const ResponseReport r = respond(s);
    const FdResponse fd = fd_response(s, 1e-6);
    CHECK(assembled_residual(s, r.u0_prime) < 1e-9);
    CHECK(rel(r.u0_prime, fd.u0_prime, kResponseFloor) < 1e-4);
    CHECK(rel(r.ell0_plus, fd.ell0_plus, kResponseFloor) < 1e-4);
    CHECK(rel(r.ell0_minus, fd.ell0_minus, kResponseFloor) < 1e-4);
    CHECK(rel(r.h_prime, fd.h_prime, kResponseFloor) < 1e-4);
    CHECK(rel(r.alpha0_prime, fd.alpha0_prime, kResponseFloor) < 1e-4);
    CHECK(r.h_prime < 0.0);
    CHECK(r.descent_margin_holds);
  }

  TEST_CASE("wave front: continuity, sign flip and sampled differences") {
    const PerturbationSetup& s = constructed().setup;
    const GContext ctx = s.orbit.g_context();
    const WaveFront w = propagate(s, ctx);
    const int n = s.orbit.period();
    CHECK(distance(w.u_prime[n], w.u_prime[0]) < 1e-10);
    for (int k = 1; k < n; ++k) {
      CHECK(w.ell_start[k] == doctest::Approx(ctx.cos_alpha(k) * w.phi_prime[k]).epsilon(1e-10));
      CHECK(w.ell_end[k - 1] == doctest::Approx(-w.ell_start[k]).epsilon(1e-10));
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 1; i <= 20; ++i) {
        const double t = s.orbit.lengths[j] * i / 21.0;
        CHECK(rel(ell_at(w, j, t), fd_ell(s, j, t, 1e-6), kResponseFloor) < 1e-4);
      }
    }
    const Vec2 mid = 0.5 * (s.orbit.point(s.table, 2) + s.orbit.point(s.table, 3));
    CHECK(ell_at(s, w, mid) == doctest::Approx(ell_at(w, 2, 0.5 * s.orbit.lengths[2])));
    CHECK_THROWS_AS(ell_at(s, w, Vec2{40, 40}), DomainError);
    CHECK_THROWS_AS(ell_at(w, n, 0.0), DomainError);
  }

  TEST_CASE("random scenes") {
    Rng rng(111);
    for (int i = 0; i < 25; ++i) {
      const Scene sc = random_near_graze_scene(rng);
      const SceneStats st = measure_scene(sc);
      CHECK(st.linear_system_residual < 1e-9);
      CHECK(st.u0_fd_error < 1e-4);
      CHECK(st.ell_fd_error < 1e-4);
      CHECK(st.h_fd_error < 1e-4);
      CHECK(st.decomposition_error < 1e-10);
      CHECK(st.bounds_hold);
      CHECK(st.descent_margin);
      CHECK(st.single_valley);
    }
  }

  TEST_CASE("bounds") {
    const PerturbationSetup& s = constructed().setup;
    const GContext ctx = s.orbit.g_context();
    const double m = s.table.min_gap(), M = s.table.max_center_distance();
    const Bounds b = bounds(s, ctx, m, M);
    CHECK(b.alpha == doctest::Approx(3.0 / m));
    CHECK(b.ell < 1.0 - std::sqrt(3.0) * m / (2 * (M + 1) * (2 * m + 1)));
    CHECK_THROWS_AS(bounds(s, ctx, 0.0, M), OverlapError);
    const ResponseReport r = respond(s);
    CHECK(std::abs(r.ell0_plus) < r.bound_ell);
    CHECK(std::abs(r.ell0_minus) < r.bound_ell);
    CHECK(std::abs(r.alpha0_prime) < r.bound_alpha);
  }

  TEST_CASE("frame invariance") {
    Rng rng(112);
    const Scene& sc = constructed();
    for (int i = 0; i < 20; ++i) CHECK(frame_invariance_error(sc, random_motion(rng)) < 1e-10);
  }

  TEST_CASE("single valley scan") {
    CHECK(single_valley({3, 2, 1, 2, 3}));
    CHECK(single_valley({1, 2, 3}));
    CHECK_FALSE(single_valley({3, 1, 2, 1, 3}));
  }
}
