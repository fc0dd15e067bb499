#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "graze/continuation.hpp"
#include "graze/orbits.hpp"
#include "graze/perturbation.hpp"
#include "oracles.hpp"
#include "suite.hpp"
#include "svg.hpp"

namespace graze::cli {

namespace fs = std::filesystem;

namespace {

struct LoadedScene {
  BilliardTable table;
  std::string text;
};

LoadedScene load(const std::optional<std::string>& path) {
  if (!path) throw UsageError("--scene is required for this command");
  std::ifstream in(*path);
  if (!in) throw UsageError("cannot open scene file " + *path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  return {parse_scene(text), std::move(text)};
}

std::string digest_of(const std::string& scene_text, const std::string& args) {
  return hex64(fnv1a(args, fnv1a(scene_text)));
}

bool wants(const CommonOptions& c, const std::string& format) { return !c.out.empty() && c.formats.count(format); }

std::string write_file(const CommonOptions& c, const std::string& name, const std::string& content) {
  const fs::path p = fs::path(c.out) / name;
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw UsageError("cannot write " + p.string());
  f << content;
  spdlog::debug("wrote {}", p.string());
  return p.string();
}

void finish(RunReport& r, const CommonOptions& c) {
  if (wants(c, "json-report")) {
    const fs::path p = fs::path(c.out) / "report.json";
    r.outputs.push_back(p.string());
    write_file(c, "report.json", r.to_json().dump(2) + "\n");
  }
}

CheckLine from(const oracle::Check& c) { return {c.name, c.measured, c.tolerance, c.pass, c.detail}; }

CheckLine below(std::string name, double measured, double tol, std::string detail = {}) {
  return {std::move(name), measured, tol, measured < tol, std::move(detail)};
}

std::string filter_args(const FilterOptions& f) {
  std::ostringstream os;
  os.precision(17);
  os << "max_period=" << f.max_period << ";single_hit_0=" << f.single_hit_0;
  if (f.near_delta) os << ";near_delta=" << *f.near_delta;
  if (f.alpha0_max) os << ";alpha0_max=" << *f.alpha0_max;
  return os.str();
}

OrbitFilter to_filter(const FilterOptions& f) {
  OrbitFilter of;
  of.near_delta = f.near_delta;
  if (f.single_hit_0) of.single_hit = 0;
  of.alpha_max = f.alpha0_max;
  return of;
}

PeriodicOrbit select_orbit(const BilliardTable& table, const SelectOptions& s) {
  if (s.sequence.has_value() == s.orbit_id.has_value())
    throw UsageError("give exactly one of --sequence and --orbit-id");
  if (s.sequence) {
    SymbolSequence seq = [&] {
      try {
        return SymbolSequence::parse(*s.sequence);
      } catch (const Error& e) {
        throw UsageError(std::string("--sequence: ") + e.what());
      }
    }();
    for (std::size_t i : seq.indices())
      if (i >= table.size()) throw UsageError("--sequence names scatterer " + std::to_string(i) + ", not in the scene");
    const SolveResult r = solve_periodic(table, seq);
    if (!r.ok()) throw UsageError("no admissible orbit " + seq.to_string() + ": " + to_string(r.status) + " (" + r.detail + ")");
    return *r.orbit;
  }
  const Enumeration e = enumerate_orbits(table, s.filter.max_period, to_filter(s.filter));
  if (*s.orbit_id < 0 || *s.orbit_id >= static_cast<int>(e.accepted.size()))
    throw UsageError("--orbit-id " + std::to_string(*s.orbit_id) + " out of range (" +
                     std::to_string(e.accepted.size()) + " orbits)");
  return e.accepted[static_cast<std::size_t>(*s.orbit_id)].orbit;
}

std::string select_args(const SelectOptions& s) {
  std::string a = filter_args(s.filter) + ";mover=" + std::to_string(s.mover);
  if (s.sequence) a += ";sequence=" + *s.sequence;
  if (s.orbit_id) a += ";orbit_id=" + std::to_string(*s.orbit_id);
  if (s.segment) a += ";segment=" + std::to_string(*s.segment);
  return a;
}

std::string fixed(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

RunReport cmd_verify(const VerifyOptions& opt) {
  if (opt.trials < 1) throw UsageError("--trials must be positive");
  RunReport r;
  r.command = "verify";
  r.seed = opt.common.seed;
  std::string scene_text;
  std::vector<std::pair<BilliardTable, PeriodicOrbit>> orbits;
  if (opt.common.scene) {
    LoadedScene s = load(opt.common.scene);
    scene_text = s.text;
    const Enumeration e = enumerate_orbits(s.table, opt.max_period);
    for (const auto& a : e.accepted) orbits.emplace_back(s.table, a.orbit);
    r.notes.push_back(std::to_string(orbits.size()) + " orbits of period <= " + std::to_string(opt.max_period) +
                      " from the scene feed the multi-step check");
  } else {
    oracle::Rng orng(opt.common.seed ^ 0x9e3779b97f4a7c15ULL);
    while (orbits.size() < 50) orbits.push_back(oracle::random_orbit(orng, 12));
    r.notes.push_back("no scene: 50 random orbits of period <= 12 feed the multi-step check");
  }
  r.inputs_digest = digest_of(scene_text, "verify;trials=" + std::to_string(opt.trials) +
                                              ";max_period=" + std::to_string(opt.max_period) +
                                              ";fault=" + std::to_string(opt.corrupt_jacobian));
  oracle::Faults faults;
  faults.corrupt_jacobian = opt.corrupt_jacobian;

  oracle::Rng rng(opt.common.seed);
  spdlog::info("verify: {} single steps", opt.trials);
  for (const auto& c : oracle::check_jacobians(rng, opt.trials, faults)) r.checks.push_back(from(c));
  spdlog::info("verify: G identities and inequalities on {} contexts", opt.trials);
  for (const auto& c : oracle::check_g_identities(rng, opt.trials)) r.checks.push_back(from(c));
  for (const auto& c : oracle::check_g_inequalities(rng, opt.trials)) r.checks.push_back(from(c));
  spdlog::info("verify: multi-step Jacobians on {} orbits", orbits.size());
  if (!orbits.empty())
    for (const auto& c : oracle::check_multi_step(orbits, faults)) r.checks.push_back(from(c));
  r.values["trials"] = opt.trials;
  r.values["orbits"] = orbits.size();

  if (wants(opt.common, "csv")) {
    std::ostringstream os;
    os.precision(17);
    os << "check,measured,tolerance,pass\n";
    for (const auto& c : r.checks) os << c.name << ',' << c.measured << ',' << c.tolerance << ',' << c.pass << '\n';
    r.outputs.push_back(write_file(opt.common, "checks.csv", os.str()));
  }
  finish(r, opt.common);
  return r;
}

RunReport cmd_orbits(const OrbitsOptions& opt) {
  if (opt.filter.max_period < 2) throw UsageError("--max-period must be at least 2");
  const LoadedScene s = load(opt.common.scene);
  RunReport r;
  r.command = "orbits";
  r.seed = opt.common.seed;
  r.inputs_digest = digest_of(s.text, "orbits;" + filter_args(opt.filter));
  const Enumeration e = enumerate_orbits(s.table, opt.filter.max_period, to_filter(opt.filter));
  spdlog::info("orbits: {} accepted, {} rejected, {} filtered out", e.accepted.size(), e.rejected.size(),
               e.filtered_out);

  r.values["accepted"] = e.accepted.size();
  r.values["rejected"] = e.rejected.size();
  r.values["filtered_out"] = e.filtered_out;
  if (e.accepted.empty()) r.notes.push_back("no orbit passed the filters");

  std::ostringstream csv;
  csv.precision(17);
  csv << "id,sequence,period,length,alpha0,grazing_margin,near_scatterer,near_segment,clearance\n";
  for (std::size_t i = 0; i < e.accepted.size(); ++i) {
    const auto& a = e.accepted[i];
    double len = 0.0;
    for (double l : a.orbit.lengths) len += l;
    csv << i << ',' << '"' << a.orbit.sequence.to_string() << '"' << ',' << a.orbit.period() << ',' << len << ','
        << a.orbit.states[0].alpha << ',' << a.orbit.grazing_margin() << ',';
    if (a.near)
      csv << a.near_scatterer << ',' << a.near->segment << ',' << a.near->clearance;
    else
      csv << ",,";
    csv << '\n';
  }
  if (wants(opt.common, "csv")) r.outputs.push_back(write_file(opt.common, "orbits.csv", csv.str()));
  if (wants(opt.common, "svg")) {
    static const char* palette[] = {"#1f4e9c", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#117a65"};
    SvgScene svg(s.table, opt.filter.single_hit_0 ? std::optional<std::size_t>(0) : std::nullopt);
    for (std::size_t i = 0; i < e.accepted.size() && i < 12; ++i) svg.orbit(e.accepted[i].orbit, palette[i % 6]);
    r.outputs.push_back(write_file(opt.common, "orbits.svg", svg.str()));
  }
  finish(r, opt.common);
  return r;
}

RunReport cmd_perturb(const PerturbOptions& opt) {
  const LoadedScene s = load(opt.common.scene);
  RunReport r;
  r.command = "perturb";
  r.seed = opt.common.seed;
  r.inputs_digest = digest_of(s.text, "perturb;" + select_args(opt.select) + ";fd_step=" + fixed(opt.fd_step));
  const PeriodicOrbit orbit = select_orbit(s.table, opt.select);

  FrameOptions fo;
  fo.mover = opt.select.mover;
  fo.segment = opt.select.segment;
  fo.delta = opt.select.filter.near_delta;
  if (opt.select.filter.alpha0_max) fo.alpha_max = *opt.select.filter.alpha0_max;
  const PerturbationSetup setup = normalize_frame(s.table, orbit, fo);
  const ResponseReport rep = respond(setup);
  const oracle::SceneStats st = oracle::measure_scene(oracle::Scene{s.table, orbit, setup}, opt.fd_step);
  spdlog::info("perturb: {} with mover {} near segment {}, h = {:.6f}", orbit.sequence.to_string(), setup.mover,
               setup.segment, setup.h);

  r.checks.push_back(below("u0-linear-system", st.linear_system_residual, 1e-9));
  r.checks.push_back(below("u0-resolve-fd", st.u0_fd_error, 1e-4));
  r.checks.push_back(below("ell0-resolve-fd", st.ell_fd_error, 1e-4));
  r.checks.push_back(below("ell0-decomposition", st.decomposition_error, 1e-10));
  r.checks.push_back(below("h-prime-resolve-fd", st.h_fd_error, 1e-4));
  r.checks.push_back(below("alpha0-prime-resolve-fd", st.alpha_fd_error, 1e-4));
  r.checks.push_back({"ell0-bound", st.ell_margin, 0.0, st.ell_margin > 0.0, "bound minus max |ell0+-|"});
  r.checks.push_back({"alpha0-prime-bound", st.alpha_margin, 0.0, st.alpha_margin > 0.0, "3/m minus |alpha0'|"});
  r.checks.push_back({"descent-margin", rep.h_prime + std::min(1 - std::abs(rep.ell0_plus), 1 - std::abs(rep.ell0_minus)),
                      0.0, st.descent_margin, "h' + min(1 - |ell0+|, 1 - |ell0-|) must be negative"});
  r.checks.push_back({"ell-single-valley", st.single_valley ? 0.0 : 1.0, 0.0, st.single_valley,
                      "|ell| sampled 20 times per segment"});

  auto& v = r.values;
  v["sequence"] = orbit.sequence.to_string();
  v["mover"] = setup.mover;
  v["segment"] = setup.segment;
  v["h"] = rep.h;
  v["alpha0"] = rep.alpha0;
  v["theta"] = rep.theta;
  v["D"] = rep.d;
  v["u0_prime"] = {rep.u0_prime.x, rep.u0_prime.y};
  v["ell0_plus"] = rep.ell0_plus;
  v["ell0_minus"] = rep.ell0_minus;
  v["h_prime"] = rep.h_prime;
  v["alpha0_prime"] = rep.alpha0_prime;
  v["bound_ell"] = rep.bound_ell;
  v["bound_alpha"] = rep.bound_alpha;

  if (wants(opt.common, "csv")) {
    std::ostringstream os;
    os.precision(17);
    os << "quantity,value,bound\n";
    os << "u0_prime_0," << rep.u0_prime.x << ",\n";
    os << "u0_prime_1," << rep.u0_prime.y << ",\n";
    os << "ell0_plus," << rep.ell0_plus << ',' << rep.bound_ell << '\n';
    os << "ell0_minus," << rep.ell0_minus << ',' << rep.bound_ell << '\n';
    os << "alpha0_prime," << rep.alpha0_prime << ',' << rep.bound_alpha << '\n';
    os << "h_prime," << rep.h_prime << ',' << -std::min(1 - std::abs(rep.ell0_plus), 1 - std::abs(rep.ell0_minus)) << '\n';
    os << "h," << rep.h << ",\n";
    os << "D," << rep.d << ",\n";
    r.outputs.push_back(write_file(opt.common, "response.csv", os.str()));
  }
  if (wants(opt.common, "svg")) {
    SvgScene svg(s.table, setup.mover);
    svg.orbit(orbit);
    svg.marker(setup.frame.inverse().apply(setup.z), "Z");
    r.outputs.push_back(write_file(opt.common, "perturb.svg", svg.str()));
  }
  finish(r, opt.common);
  return r;
}

RunReport cmd_continue(const ContinueOptions& opt) {
  const LoadedScene s = load(opt.common.scene);
  RunReport r;
  r.command = "continue";
  r.seed = opt.common.seed;
  r.inputs_digest = digest_of(s.text, "continue;" + select_args(opt.select) + ";epsilon=" + fixed(opt.epsilon) +
                                          ";step=" + fixed(opt.step) + ";max_steps=" + std::to_string(opt.max_steps));
  const PeriodicOrbit orbit = select_orbit(s.table, opt.select);

  ContinuationConfig cfg;
  cfg.epsilon = opt.epsilon;
  cfg.gamma_step = opt.step;
  cfg.max_step = std::max(cfg.max_step, opt.step);
  cfg.min_step = std::min(cfg.min_step, opt.step);
  cfg.max_steps = opt.max_steps;
  cfg.mover = opt.select.mover;
  cfg.delta = opt.select.filter.near_delta;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const ContinuationTrace tr = run(s.table, orbit, cfg);
  spdlog::info("continue: {} after {} steps, displacement {:.6g}", to_string(tr.outcome), tr.steps.size(), tr.gamma());

  bool monotone = true, angle_ok = true;
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    if (i > 0 && !(tr.steps[i].h < tr.steps[i - 1].h)) monotone = false;
    if (!(std::abs(tr.steps[i].alpha0) < kPi / 6)) angle_ok = false;
  }
  std::optional<Certificate> cert;
  std::string why;
  try {
    cert = certify(tr);
  } catch (const InvalidTraceError& e) {
    why = e.what();
  }
  const double h_end = tr.steps.empty() ? std::nan("") : tr.steps.back().h;
  r.checks.push_back({"certificate", cert ? std::abs(cert->h - 1.0) : std::abs(h_end - 1.0), 1e-6, cert.has_value(),
                      cert ? cert->kind : why});
  r.checks.push_back({"displacement-within-epsilon", tr.gamma(), tr.epsilon, tr.gamma() <= tr.epsilon, ""});
  r.checks.push_back({"h-decreasing", monotone ? 0.0 : 1.0, 0.0, monotone, "clearance strictly decreasing along the trace"});
  r.checks.push_back({"alpha0-below-pi/6", angle_ok ? 0.0 : 1.0, 0.0, angle_ok, "|alpha0| < pi/6 at every step"});

  auto& v = r.values;
  v["sequence"] = orbit.sequence.to_string();
  v["outcome"] = to_string(tr.outcome);
  v["detail"] = tr.detail;
  v["steps"] = tr.steps.size();
  v["displacement"] = tr.gamma();
  v["epsilon"] = tr.epsilon;
  v["realized_delta"] = tr.realized_delta;
  v["descent_bound"] = tr.descent_bound;
  v["min_descent_rate"] = tr.min_descent_rate;
  if (!tr.steps.empty()) {
    v["h_start"] = tr.steps.front().h;
    v["h_end"] = tr.steps.back().h;
  }

  if (wants(opt.common, "csv")) {
    std::ostringstream os;
    write_trace_csv(os, tr);
    r.outputs.push_back(write_file(opt.common, "trace.csv", os.str()));
  }
  if (cert && !opt.common.out.empty()) {
    nlohmann::ordered_json c;
    c["kind"] = cert->kind;
    c["mover"] = cert->mover;
    c["sequence"] = cert->sequence;
    c["gamma"] = cert->gamma;
    c["displacement"] = cert->displacement;
    c["epsilon"] = cert->epsilon;
    c["h"] = cert->h;
    c["closure"] = cert->closure;
    c["min_margin"] = cert->min_margin;
    c["site"] = {{"collision", cert->site.collision}, {"segment", cert->site.segment}, {"scatterer", cert->site.scatterer}};
    auto& cs = c["centers"] = nlohmann::ordered_json::array();
    for (const Vec2& p : cert->centers) cs.push_back({p.x, p.y});
    r.outputs.push_back(write_file(opt.common, "certificate.json", c.dump(2) + "\n"));
  }
  if (wants(opt.common, "svg")) {
    // One frame per accepted step: the moved table, its orbit, Z and the path of C_0 so far.
    std::vector<Vec2> path;
    std::vector<double> phi;
    for (const auto& st : orbit.states) phi.push_back(st.phi);
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
      const TraceStep& st = tr.steps[i];
      path.push_back(st.c0);
      const BilliardTable t = tr.initial_table.with_center(tr.mover, st.c0);
      SvgScene svg(t, tr.mover);
      svg.ghost_disk(tr.initial_table.center(tr.mover));
      SolveOptions so;
      so.initial_phi = phi;
      so.check_admissibility = false;
      const SolveResult sr = solve_periodic(t, orbit.sequence, so);
      if (sr.orbit) {
        svg.orbit(*sr.orbit);
        phi.clear();
        for (const auto& cs : sr.orbit->states) phi.push_back(cs.phi);
      }
      svg.path(path);
      svg.marker(st.z, "Z");
      char name[32];
      std::snprintf(name, sizeof name, "frames/step_%04zu.svg", i);
      r.outputs.push_back(write_file(opt.common, name, svg.str()));
    }
  }
  finish(r, opt.common);
  return r;
}

}  // namespace graze::cli
