#include <cmath>
#include <sstream>

#include "doctest.h"
#include "graze/continuation.hpp"
#include "graze/errors.hpp"
#include "oracles.hpp"

using namespace graze;
using namespace graze::oracle;

namespace {

const Scene& constructed() {
  static const Scene s = constructed_near_graze(1.03);
  return s;
}

const ContinuationTrace& constructed_run() {
  static const ContinuationTrace tr = run(constructed().table, constructed().orbit, ContinuationConfig{});
  return tr;
}

}  // namespace

TEST_SUITE("continuation") {
  TEST_CASE("config validation") {
    ContinuationConfig c;
    CHECK_NOTHROW(c.validate());
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.min_step = 0.1;
    CHECK_THROWS_AS(c.validate(), DomainError);
  }

  TEST_CASE("constructed scene grazes at the mover") {
    const ContinuationTrace& tr = constructed_run();
    REQUIRE(tr.outcome == Outcome::grazing_at_mover);
    CHECK(tr.hypotheses_held);
    CHECK(tr.steps.front().h == doctest::Approx(1.03).epsilon(1e-10));
    CHECK(tr.realized_delta == doctest::Approx(0.03).epsilon(1e-8));
    const Certificate c = certify(tr);
    CHECK(c.kind == "grazing-at-scatterer");
    CHECK(std::abs(c.h - 1.0) < 1e-6);
    CHECK(c.displacement <= c.epsilon);
    CHECK(c.displacement == doctest::Approx(distance(c.centers[0], constructed().table.center(0))).epsilon(1e-12));
    CHECK(c.closure < 1e-9);
  }

  TEST_CASE("descent rate and incidence angle along the trace") {
    const ContinuationTrace& tr = constructed_run();
    const double m0 = tr.initial_table.min_gap();
    const double M0 = tr.initial_table.max_center_distance();
    const double a0 = std::abs(tr.steps.front().alpha0);
    for (std::size_t i = 1; i < tr.steps.size(); ++i) {
      const TraceStep& p = tr.steps[i - 1];
      const TraceStep& q = tr.steps[i];
      const double g = q.gamma;
      const double m = m0 - g, M = M0 + g;
      const double rate = std::sqrt(3.0) * m / (2 * (M + 1) * (2 * m + 1));
      CHECK((q.h - p.h) / (q.gamma - p.gamma) < -rate);
      CHECK(std::abs(q.alpha0) < a0 + 3.0 / m * g);
      CHECK(std::abs(q.alpha0) < kPi / 6);
      CHECK(q.h < p.h);
    }
  }

  TEST_CASE("a fifth disk just off segment 2 is grazed first") {
    const Scene& sc = constructed();
    const Vec2 p0 = sc.orbit.point(sc.table, 2), p1 = sc.orbit.point(sc.table, 3);
    const Vec2 d = normalized(p1 - p0);
    std::vector<Vec2> cs(sc.table.centers().begin(), sc.table.centers().end());
    cs.push_back(0.5 * (p0 + p1) + 1.0001 * Vec2{-d.y, d.x});
    const BilliardTable t(cs);
    const SolveResult r = solve_periodic(t, sc.orbit.sequence);
    REQUIRE(r.ok());
    const ContinuationTrace tr = run(t, *r.orbit, ContinuationConfig{});
    REQUIRE(tr.outcome == Outcome::grazing_elsewhere);
    const Certificate c = certify(tr);
    CHECK(c.kind == "grazing-elsewhere");
    CHECK(c.site.segment == 2);
    CHECK(c.site.scatterer == 4);
    CHECK(c.site.collision == -1);
    CHECK(c.gamma < tr.epsilon);
  }

  TEST_CASE("a truncated run does not certify") {
    ContinuationConfig c;
    c.max_steps = 1;
    const ContinuationTrace tr = run(constructed().table, constructed().orbit, c);
    CHECK(tr.outcome == Outcome::step_limit);
    CHECK_THROWS_AS(certify(tr), InvalidTraceError);
  }

  TEST_CASE("a small budget stops the run") {
    ContinuationConfig c;
    c.epsilon = 0.01;
    const ContinuationTrace tr = run(constructed().table, constructed().orbit, c);
    CHECK(tr.outcome == Outcome::epsilon_exceeded);
    CHECK(tr.gamma() <= 0.01 + 1e-12);
    CHECK_THROWS_AS(certify(tr), InvalidTraceError);
  }

  TEST_CASE("runs are deterministic") {
    const ContinuationTrace a = run(constructed().table, constructed().orbit, ContinuationConfig{});
    const ContinuationTrace& b = constructed_run();
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
      CHECK(a.steps[i].gamma == b.steps[i].gamma);
      CHECK(a.steps[i].h == b.steps[i].h);
      CHECK(a.steps[i].c0 == b.steps[i].c0);
    }
    std::ostringstream x, y;
    write_trace_csv(x, a);
    write_trace_csv(y, b);
    CHECK(x.str() == y.str());
    CHECK(x.str().rfind("step,gamma,c0_x,c0_y,h,alpha0,ell0_plus,ell0_minus,h_prime,min_margin,closure\n", 0) == 0);
  }

  TEST_CASE("start outside the hypotheses") {
    ContinuationConfig c;
    c.delta = 0.01;
    CHECK_THROWS_AS(run(constructed().table, constructed().orbit, c), PreconditionError);
  }
}
