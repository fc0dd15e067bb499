// graze: verification suites, orbit search, perturbation reports and
// continuation runs for dispersing billiards with unit-disk scatterers.
//
// Exit status: 0 when every check passes, 1 when one fails, 2 on bad usage
// or unreadable input. The JSON report always goes to stdout.

#include <cstdlib>
#include <iostream>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "commands.hpp"
#include "graze/vec2.hpp"

using namespace graze;
using namespace graze::cli;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("graze");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("GRAZE_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug")
    spdlog::set_level(spdlog::level::debug);
  else if (level == "info")
    spdlog::set_level(spdlog::level::info);
  else
    spdlog::set_level(spdlog::level::err);
}

void common_flags(CLI::App* app, CommonOptions& c) {
  app->add_option("--scene", c.scene, "Scene JSON: {\"centers\": [[x, y], ...]}");
  app->add_option("--seed", c.seed, "Seed for randomized sweeps")->capture_default_str();
  app->add_option("--out", c.out, "Directory for output files (none if omitted)");
  app->add_option("--format", c.formats, "Files to write: csv, svg, json-report (repeatable)")
      ->check(CLI::IsMember({"csv", "svg", "json-report"}))
      ->expected(1, 3)
      ->capture_default_str();
}

void filter_flags(CLI::App* app, FilterOptions& f) {
  app->add_option("--max-period", f.max_period, "Longest itinerary to enumerate")->capture_default_str();
  app->add_option("--near-delta", f.near_delta, "Keep orbits passing a disk at clearance in (1, 1 + delta)");
  app->add_flag("--single-hit-0", f.single_hit_0, "Keep orbits that hit scatterer 0 exactly once");
  app->add_option("--alpha0-max", f.alpha0_max, "Bound on |alpha_0| at the first collision");
}

void select_flags(CLI::App* app, SelectOptions& s) {
  filter_flags(app, s.filter);
  app->add_option("--sequence", s.sequence, "Itinerary, e.g. 0,1,2,3");
  app->add_option("--orbit-id", s.orbit_id, "Row of the orbits listing made with the same filter flags");
  app->add_option("--mover", s.mover, "Scatterer to move")->capture_default_str();
  app->add_option("--segment", s.segment, "Segment passing near the mover (default: closest)");
}

void emit(const RunReport& r) { std::cout << r.to_json().dump(2) << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Grazing-orbit tools for dispersing billiards"};
  app.require_subcommand(1);

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "Run the Jacobian and G-function oracle suite");
  common_flags(v, verify.common);
  v->add_option("--trials", verify.trials, "Random steps and contexts per check")->capture_default_str();
  v->add_option("--max-period", verify.max_period, "Orbits taken from --scene")->capture_default_str();
  v->add_flag("--inject-fault-jacobian", verify.corrupt_jacobian)->group("");

  OrbitsOptions orbits;
  auto* o = app.add_subcommand("orbits", "Enumerate admissible periodic orbits");
  common_flags(o, orbits.common);
  filter_flags(o, orbits.filter);

  PerturbOptions perturb;
  auto* p = app.add_subcommand("perturb", "First-order response to moving one scatterer");
  common_flags(p, perturb.common);
  select_flags(p, perturb.select);
  p->add_option("--fd-step", perturb.fd_step, "Displacement for the re-solve differences")->capture_default_str();

  ContinueOptions cont;
  auto* c = app.add_subcommand("continue", "Move a scatterer until the orbit grazes");
  common_flags(c, cont.common);
  select_flags(c, cont.select);
  c->add_option("--epsilon", cont.epsilon, "Displacement budget")->capture_default_str();
  c->add_option("--step", cont.step, "Initial continuation step")->capture_default_str();
  c->add_option("--max-steps", cont.max_steps, "Accepted steps before giving up")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunReport r;
    if (*v) r = cmd_verify(verify);
    else if (*o) r = cmd_orbits(orbits);
    else if (*p) r = cmd_perturb(perturb);
    else r = cmd_continue(cont);
    emit(r);
    for (const auto& ch : r.checks)
      if (!ch.pass) spdlog::error("check failed: {} (measured {:.3e}, tolerance {:.3e}) {}", ch.name, ch.measured, ch.tolerance, ch.detail);
    return r.pass() ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ", column " << e.column() << ")";
    std::cerr << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
