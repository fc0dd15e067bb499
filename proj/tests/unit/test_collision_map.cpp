#include <cmath>

#include "doctest.h"
#include "graze/collision_map.hpp"
#include "graze/errors.hpp"
#include "oracles.hpp"

using namespace graze;
using namespace graze::oracle;

namespace {

bool close(const Mat2& a, const Mat2& b, double tol) { return relative_error(a, b) < tol; }

StepData axial_step() { return *StepData::from_state(0.0, 0.0, {4, 0}); }

}  // namespace

TEST_SUITE("collision_map") {
  TEST_CASE("axial step data") {
    const StepData s = axial_step();
    CHECK(s.length() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(s.alpha_next()) < 1e-15);
    CHECK(s.omega() == 0.0);
    CHECK_FALSE(StepData::from_state(0.0, 0.0, {0, 4}));
  }

  TEST_CASE("Jacobians on the axial step") {
    const StepData s = axial_step();
    CHECK(close(dF_dstate(s), Mat2{{-3, 4, 2, -3}}, 1e-14));
    CHECK(close(dB_du(s), Mat2{{-6, -1, 1, 0}}, 1e-14));
    CHECK(close(dB_dr(s), Mat2{{0, 2, 0, 0}}, 1e-14));
    CHECK(dF_dstate(s).det() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(close(fd_dF_dstate(0.0, 0.0, {4, 0}, 1e-6), Mat2{{-3, 4, 2, -3}}, 1e-5));
    CHECK(close(fd_dB_du(0.0, 0.0, {4, 0}, 1e-6), Mat2{{-6, -1, 1, 0}}, 1e-5));
  }

  TEST_CASE("axial orbit under B") {
    const MapResult a = apply_B({0.0, kPi}, {4, 0});
    REQUIRE(a.status == MapStatus::ok);
    CHECK(a.u.omega_out == doctest::Approx(kPi).epsilon(1e-14));
    CHECK(std::abs(angle_diff(a.u.omega_in, 0.0)) < 1e-14);
    const MapResult b = apply_B(a.u, {-4, 0});
    REQUIRE(b.status == MapStatus::ok);
    CHECK(std::abs(angle_diff(b.u.omega_out, 0.0)) < 1e-14);
    CHECK(std::abs(angle_diff(b.u.omega_in, kPi)) < 1e-14);
  }

  TEST_CASE("B agrees with the ray geometry") {
    Rng rng(81);
    for (int i = 0; i < 300; ++i) {
      const RandomStep st = random_step(rng);
      const BilliardTable t({{0, 0}, st.r});
      const CollisionState from{0, st.phi, st.alpha};
      const auto hit = next_collision(t, from.point(t), unit(from.omega_out()), 0);
      REQUIRE(hit);
      REQUIRE(hit->scatterer == 1);
      const MapResult b = apply_B(to_u(st.phi, st.alpha), st.r);
      REQUIRE(b.status == MapStatus::ok);
      const UCoords want = to_u(hit->state);
      CHECK(std::abs(angle_diff(b.u.omega_out, want.omega_out)) < 1e-10);
      CHECK(std::abs(angle_diff(b.u.omega_in, want.omega_in)) < 1e-10);
      CHECK(b.length == doctest::Approx(hit->length).epsilon(1e-10));
    }
  }

  TEST_CASE("random steps: finite differences, determinant, conjugation, dB/dr rows") {
    Rng rng(82);
    const Mat2 k = kStateToU;
    for (int i = 0; i < 200; ++i) {
      const RandomStep st = random_step(rng);
      const StepData s = *StepData::from_state(st.phi, st.alpha, st.r);
      CHECK(relative_error(dF_dstate(s), fd_dF_dstate(st.phi, st.alpha, st.r, 1e-6)) < 1e-5);
      CHECK(relative_error(dB_du(s), fd_dB_du(st.phi, st.alpha, st.r, 1e-6)) < 1e-5);
      CHECK(relative_error(dB_dr(s), fd_dB_dr(st.phi, st.alpha, st.r, 1e-6)) < 1e-5);
      CHECK(dB_du(s).det() == doctest::Approx(std::cos(s.alpha()) / std::cos(s.alpha_next())).epsilon(1e-12));
      CHECK(relative_error(dB_du(s), k * dF_dstate(s) * k.inverse()) < 1e-12);
      const Mat2 r = dB_dr(s);
      CHECK(r(1, 0) == 0.0);
      CHECK(r(1, 1) == 0.0);
    }
  }

  TEST_CASE("equal incidence angles give unit determinant") {
    const StepData s = *StepData::from_state(0.3, 0.2, {4 * std::cos(0.1), 4 * std::sin(0.1)});
    if (std::abs(s.alpha() - s.alpha_next()) < 1e-12) CHECK(dF_dstate(s).det() == doctest::Approx(1.0));
    // Symmetric configuration: the chord between two equal disks makes equal angles.
    const StepData e = *StepData::from_state(0.25, 0.25, {4, 0});
    CHECK(e.alpha_next() == doctest::Approx(e.alpha()).epsilon(1e-12));
    CHECK(dF_dstate(e).det() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("Jacobians refuse grazing steps") {
    // Tangent departure from disk 0.
    const auto s = StepData::from_state(kPi / 2, kPi / 2 - 1e-9, {4, 1});
    if (s) {
      CHECK_THROWS_AS(dF_dstate(*s), GrazingError);
      CHECK_THROWS_AS(dB_du(*s), GrazingError);
    }
    CHECK(apply_F(kPi / 2, 0.0, {4, 0}).status == MapStatus::grazing);
    CHECK(apply_B({0.0, 0.0}, {4, 0}).status == MapStatus::grazing);
  }
}
