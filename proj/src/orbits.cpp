#include "graze/orbits.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "graze/errors.hpp"

namespace graze {

namespace {

int wrap_index(int k, int n) { return ((k % n) + n) % n; }

// Boundary tangent dQ/dphi.
Vec2 tangent(double phi) { return {-std::sin(phi), std::cos(phi)}; }

struct LengthModel {
  double length = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

LengthModel evaluate(const BilliardTable& table, const SymbolSequence& seq, const Eigen::VectorXd& phi,
                     bool with_hessian) {
  const int n = seq.size();
  LengthModel m;
  m.gradient = Eigen::VectorXd::Zero(n);
  if (with_hessian) m.hessian = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const int k1 = wrap_index(k + 1, n);
    const Vec2 q0 = table.center(seq[k]) + unit(phi[k]);
    const Vec2 q1 = table.center(seq[k1]) + unit(phi[k1]);
    const Vec2 d = q1 - q0;
    const double dist = norm(d);
    const Vec2 e = (1.0 / dist) * d;
    const Vec2 t0 = tangent(phi[k]);
    const Vec2 t1 = tangent(phi[k1]);
    m.length += dist;
    m.gradient[k] -= dot(e, t0);
    m.gradient[k1] += dot(e, t1);
    if (!with_hessian) continue;
    // (I - e e^T) / dist applied between the two tangents.
    auto proj = [&](Vec2 a, Vec2 b) { return (dot(a, b) - dot(a, e) * dot(b, e)) / dist; };
    m.hessian(k, k) += proj(t0, t0) + dot(e, unit(phi[k]));
    m.hessian(k1, k1) += proj(t1, t1) - dot(e, unit(phi[k1]));
    const double off = -proj(t0, t1);
    m.hessian(k, k1) += off;
    m.hessian(k1, k) += off;
  }
  return m;
}

PeriodicOrbit build_orbit(const BilliardTable& table, const SymbolSequence& seq, const Eigen::VectorXd& phi) {
  const int n = seq.size();
  PeriodicOrbit orbit{seq, {}, {}, {}};
  orbit.lengths.resize(n);
  orbit.omega.resize(n);
  orbit.states.resize(n);
  for (int k = 0; k < n; ++k) {
    const Vec2 q0 = table.center(seq[k]) + unit(phi[k]);
    const Vec2 q1 = table.center(seq[k + 1]) + unit(phi[wrap_index(k + 1, n)]);
    orbit.lengths[k] = distance(q0, q1);
    orbit.omega[k] = wrap_angle(angle_of(q1 - q0));
  }
  double closure = 0.0;
  for (int k = 0; k < n; ++k) {
    const double p = wrap_angle(phi[k]);
    const double a = incidence_angle(p, orbit.omega[wrap_index(k - 1, n)]);
    orbit.states[k] = CollisionState{seq[k], p, a};
    closure = std::max(closure, std::abs(angle_diff(orbit.omega[k], p - a)));
  }
  orbit.closure_residual = closure;
  return orbit;
}

}  // namespace

SymbolSequence::SymbolSequence(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  if (indices_.size() < 2) throw DomainError("symbol sequence needs at least 2 entries");
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] == indices_[(k + 1) % indices_.size()])
      throw DomainError("symbol sequence repeats scatterer " + std::to_string(indices_[k]) + " at position " +
                        std::to_string(k));
  }
}

SymbolSequence SymbolSequence::parse(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      throw ParseError("sequence: not an index: '" + item + "'");
    }
    if (pos != item.size() && item.find_first_not_of(" \t", pos) != std::string::npos)
      throw ParseError("sequence: not an index: '" + item + "'");
    out.push_back(v);
  }
  return SymbolSequence(std::move(out));
}

std::size_t SymbolSequence::operator[](int k) const { return indices_[wrap_index(k, size())]; }

SymbolSequence SymbolSequence::rotated(int offset) const {
  std::vector<std::size_t> out(indices_.size());
  for (int k = 0; k < size(); ++k) out[k] = (*this)[k + offset];
  return SymbolSequence(std::move(out));
}

SymbolSequence SymbolSequence::canonical() const {
  SymbolSequence best = *this;
  for (int r = 1; r < size(); ++r) {
    SymbolSequence c = rotated(r);
    if (c.indices_ < best.indices_) best = std::move(c);
  }
  return best;
}

bool SymbolSequence::is_primitive() const {
  const int n = size();
  for (int p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool periodic = true;
    for (int k = 0; k < n && periodic; ++k) periodic = (*this)[k] == (*this)[k + p];
    if (periodic) return false;
  }
  return true;
}

int SymbolSequence::count(std::size_t scatterer) const {
  return static_cast<int>(std::count(indices_.begin(), indices_.end(), scatterer));
}

std::string SymbolSequence::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(indices_[k]);
  }
  return s;
}

const CollisionState& PeriodicOrbit::state(int k) const { return states[wrap_index(k, period())]; }
double PeriodicOrbit::length(int k) const { return lengths[wrap_index(k, period())]; }
double PeriodicOrbit::direction(int k) const { return omega[wrap_index(k, period())]; }

StepData PeriodicOrbit::step(const BilliardTable& table, int k) const {
  return StepData::between(table, state(k), state(k + 1));
}

GContext PeriodicOrbit::g_context() const {
  std::vector<double> alphas;
  alphas.reserve(states.size());
  for (const auto& s : states) alphas.push_back(s.alpha);
  return GContext(lengths, alphas);
}

PeriodicOrbit PeriodicOrbit::rotated(int offset) const {
  PeriodicOrbit out = *this;
  out.sequence = sequence.rotated(offset);
  for (int k = 0; k < period(); ++k) {
    out.states[k] = state(k + offset);
    out.lengths[k] = length(k + offset);
    out.omega[k] = direction(k + offset);
  }
  return out;
}

double PeriodicOrbit::grazing_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : states) m = std::min(m, kPi / 2 - std::abs(s.alpha));
  return m;
}

PeriodicOrbit transform(const PeriodicOrbit& orbit, const RigidMotion& g) {
  PeriodicOrbit out = orbit;
  for (auto& st : out.states) {
    st.phi = g.apply_angle(st.phi);
    st.alpha = g.apply_signed(st.alpha);
  }
  for (auto& w : out.omega) w = g.apply_angle(w);
  return out;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::ok: return "ok";
    case SolveStatus::grazing: return "grazing";
    case SolveStatus::inadmissible: return "inadmissible";
    case SolveStatus::no_orbit: return "no-orbit";
  }
  return "?";
}

double orbit_length(const BilliardTable& table, const SymbolSequence& sequence, const std::vector<double>& phi,
                    std::vector<double>* gradient) {
  if (static_cast<int>(phi.size()) != sequence.size()) throw DomainError("orbit_length: wrong number of angles");
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()));
  const LengthModel m = evaluate(table, sequence, x, false);
  if (gradient) gradient->assign(m.gradient.data(), m.gradient.data() + m.gradient.size());
  return m.length;
}

SolveResult solve_periodic(const BilliardTable& table, const SymbolSequence& seq, const SolveOptions& opt) {
  const int n = seq.size();
  for (std::size_t i : seq.indices())
    if (i >= table.size()) throw DomainError("sequence names scatterer " + std::to_string(i) + " not on the table");

  Eigen::VectorXd phi(n);
  if (!opt.initial_phi.empty()) {
    if (static_cast<int>(opt.initial_phi.size()) != n) throw DomainError("initial_phi has the wrong length");
    for (int k = 0; k < n; ++k) phi[k] = opt.initial_phi[k];
  } else {
    for (int k = 0; k < n; ++k) phi[k] = angle_of(table.center(seq[k + 1]) - table.center(seq[k]));
  }

  SolveResult res;
  LengthModel m = evaluate(table, seq, phi, true);
  double gnorm = m.gradient.norm();
  bool converged = gnorm < opt.gradient_tolerance;
  int it = 0;
  for (; it < opt.max_iterations && !converged; ++it) {
    // Newton step for the minimum; shift the Hessian until it is positive definite.
    Eigen::MatrixXd h = m.hessian;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    double shift = 1e-8 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    while (llt.info() != Eigen::Success) {
      h = m.hessian + shift * Eigen::MatrixXd::Identity(n, n);
      llt.compute(h);
      shift *= 10.0;
    }
    const Eigen::VectorXd dir = -llt.solve(m.gradient);
    const double slope = m.gradient.dot(dir);

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= opt.max_halvings; ++halving, t *= 0.5) {
      const Eigen::VectorXd trial = phi + t * dir;
      LengthModel mt = evaluate(table, seq, trial, true);
      const double gt = mt.gradient.norm();
      if (!std::isfinite(mt.length)) continue;
      const bool length_drop = mt.length <= m.length + 1e-4 * t * slope && mt.length < m.length;
      if (gt < gnorm || length_drop) {
        phi = trial;
        m = std::move(mt);
        gnorm = gt;
        accepted = true;
        break;
      }
    }
    if (gnorm < opt.gradient_tolerance) converged = true;
    if (!accepted) {
      // Stalled at the roundoff floor of the gradient.
      converged = gnorm < 1e-10;
      break;
    }
  }
  res.iterations = it;
  if (!converged) {
    res.status = SolveStatus::no_orbit;
    res.detail = "Newton did not converge (|grad L| = " + std::to_string(gnorm) + ")";
    return res;
  }

  PeriodicOrbit orbit = build_orbit(table, seq, phi);
  orbit.gradient_norm = gnorm;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.hessian, Eigen::EigenvaluesOnly);
  orbit.min_hessian_eigenvalue = eig.eigenvalues().minCoeff();

  for (int k = 0; k < n; ++k) {
    const double a = orbit.states[k].alpha;
    if (std::abs(a) > kPi / 2 + kGrazingTolerance) {
      res.status = SolveStatus::inadmissible;
      res.detail = "collision " + std::to_string(k) + " is on the far side of scatterer " + std::to_string(seq[k]);
      res.orbit = std::move(orbit);
      return res;
    }
    // A stationary point of L can also pass straight through a scatterer
    // (outgoing segment re-entering the disk); only true reflections count.
    const double out = wrap_angle(orbit.states[k].phi - orbit.omega[k] - a);
    if (std::abs(out) > 1e-6 && std::abs(out - 2 * kPi) > 1e-6) {
      res.status = SolveStatus::inadmissible;
      res.detail = "collision " + std::to_string(k) + " passes through scatterer " + std::to_string(seq[k]);
      res.orbit = std::move(orbit);
      return res;
    }
  }
  for (int k = 0; k < n; ++k) {
    if (is_grazing(orbit.states[k].alpha)) {
      res.status = SolveStatus::grazing;
      res.detail = "collision " + std::to_string(k) + " is tangential";
      res.orbit = std::move(orbit);
      return res;
    }
  }
  if (opt.check_admissibility) {
    for (int k = 0; k < n; ++k) {
      const std::size_t ends[2] = {seq[k], seq[k + 1]};
      const Clearance c = segment_clearance(table, orbit.point(table, k), orbit.point(table, k + 1), ends);
      if (c.found && c.distance <= 1.0 + 1e-9) {
        res.status = SolveStatus::inadmissible;
        res.detail = "segment " + std::to_string(k) + " meets scatterer " + std::to_string(c.scatterer);
        res.orbit = std::move(orbit);
        return res;
      }
    }
  }
  res.status = SolveStatus::ok;
  res.orbit = std::move(orbit);
  return res;
}

Jacobian2 multi_step_jacobian(const PeriodicOrbit& orbit, int j, int k) {
  if (!(j < k)) throw DomainError("multi_step_jacobian needs j < k");
  for (int i = j; i <= k; ++i)
    if (is_grazing(orbit.state(i).alpha))
      throw GrazingError("multi_step_jacobian: grazing collision at " + std::to_string(i));
  const GContext ctx = orbit.g_context();
  const double cj = ctx.cos_alpha(j);
  const double ck = ctx.cos_alpha(k);
  const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
  const double f = sign / pcos(ctx, j + 1, k + 1);
  return f * Mat2{{G(ctx, j, k), cj * G(ctx, j + 1, k), -ck * G(ctx, j, k - 1), -cj * ck * G(ctx, j + 1, k - 1)}};
}

Jacobian2 jacobian_product(const PeriodicOrbit& orbit, const BilliardTable& table, int j, int k) {
  if (!(j <= k)) throw DomainError("jacobian_product needs j <= k");
  Mat2 p = Mat2::identity();
  for (int i = j; i < k; ++i) p = dB_du(orbit.step(table, i)) * p;
  return p;
}

std::optional<NearSegment> find_near_segment(const BilliardTable& table, const PeriodicOrbit& orbit,
                                             std::size_t scatterer) {
  const int n = orbit.period();
  const Vec2 c = table.center(scatterer);
  std::optional<NearSegment> best;
  for (int k = 1; k + 1 < n; ++k) {
    if (orbit.sequence[k] == scatterer || orbit.sequence[k + 1] == scatterer) continue;
    const SegmentDistance d = point_segment_distance(c, orbit.point(table, k), orbit.point(table, k + 1));
    if (!(d.t > 0.0 && d.t < 1.0)) continue;
    if (!best || d.distance < best->clearance) best = NearSegment{k, d.distance, d.foot, d.t};
  }
  return best;
}

namespace {

void sequences_of_length(int n, std::size_t k, std::vector<std::size_t>& cur, std::vector<SymbolSequence>& out) {
  if (static_cast<int>(cur.size()) == n) {
    if (cur.front() == cur.back()) return;
    SymbolSequence s(cur);
    if (s.is_primitive() && s.canonical() == s) out.push_back(std::move(s));
    return;
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!cur.empty() && cur.back() == i) continue;
    // Canonical rotations start with their smallest symbol.
    if (!cur.empty() && i < cur.front()) continue;
    cur.push_back(i);
    sequences_of_length(n, k, cur, out);
    cur.pop_back();
  }
}

// Closest non-endpoint disk to any segment, with interior foot point.
std::optional<std::pair<std::size_t, NearSegment>> nearest_passage(const BilliardTable& table,
                                                                   const PeriodicOrbit& orbit) {
  std::optional<std::pair<std::size_t, NearSegment>> best;
  for (int k = 0; k < orbit.period(); ++k) {
    const Vec2 p0 = orbit.point(table, k);
    const Vec2 p1 = orbit.point(table, k + 1);
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (i == orbit.sequence[k] || i == orbit.sequence[k + 1]) continue;
      const SegmentDistance d = point_segment_distance(table.center(i), p0, p1);
      if (!(d.t > 0.0 && d.t < 1.0)) continue;
      if (!best || d.distance < best->second.clearance) best = {{i, NearSegment{k, d.distance, d.foot, d.t}}};
    }
  }
  return best;
}

}  // namespace

Enumeration enumerate_orbits(const BilliardTable& table, int max_period, const OrbitFilter& filter) {
  if (max_period < 2) throw DomainError("max_period must be at least 2");
  Enumeration out;
  std::vector<SymbolSequence> seqs;
  for (int n = 2; n <= max_period; ++n) {
    std::vector<std::size_t> cur;
    sequences_of_length(n, table.size(), cur, seqs);
  }
  std::sort(seqs.begin(), seqs.end());
  for (const auto& seq : seqs) {
    if (filter.single_hit && seq.count(*filter.single_hit) != 1) {
      ++out.filtered_out;
      continue;
    }
    SolveResult r = solve_periodic(table, seq);
    if (!r.ok()) {
      out.rejected.emplace_back(seq, r.status);
      continue;
    }
    EnumeratedOrbit e{std::move(*r.orbit), std::nullopt, 0};
    if (filter.single_hit) {
      const auto& idx = e.orbit.sequence.indices();
      const int pos = static_cast<int>(std::find(idx.begin(), idx.end(), *filter.single_hit) - idx.begin());
      e.orbit = e.orbit.rotated(pos);
      e.near = find_near_segment(table, e.orbit, *filter.single_hit);
      e.near_scatterer = *filter.single_hit;
    } else if (auto p = nearest_passage(table, e.orbit)) {
      e.near_scatterer = p->first;
      e.near = p->second;
    }
    if (filter.alpha_max && !(std::abs(e.orbit.states[0].alpha) < *filter.alpha_max)) {
      ++out.filtered_out;
      continue;
    }
    if (filter.near_delta &&
        !(e.near && e.near->clearance > 1.0 && e.near->clearance < 1.0 + *filter.near_delta)) {
      ++out.filtered_out;
      continue;
    }
    out.accepted.push_back(std::move(e));
  }
  return out;
}

void write_orbit_csv(std::ostream& out, const PeriodicOrbit& orbit) {
  const auto old = out.precision(17);
  out << "k,scatterer,phi,alpha,omega,s\n";
  for (int k = 0; k < orbit.period(); ++k) {
    const auto& st = orbit.states[k];
    out << k << ',' << st.scatterer << ',' << st.phi << ',' << st.alpha << ',' << orbit.omega[k] << ','
        << orbit.lengths[k] << '\n';
  }
  out.precision(old);
}

PeriodicOrbit read_orbit_csv(std::istream& in, const BilliardTable& table) {
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError("orbit csv: empty input", 1, 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "k,scatterer,phi,alpha,omega,s") throw ParseError("orbit csv: unexpected header", 1, 1);

  std::vector<std::size_t> seq;
  std::vector<double> phi, alpha, omega, s;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw ParseError("orbit csv: expected 6 columns", lineno, 1);
    double v[6];
    int column = 1;
    for (int c = 0; c < 6; ++c) {
      std::size_t pos = 0;
      try {
        v[c] = std::stod(cells[c], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != cells[c].size()) throw ParseError("orbit csv: not a number", lineno, column);
      column += static_cast<int>(cells[c].size()) + 1;
    }
    if (v[0] != static_cast<double>(seq.size())) throw ParseError("orbit csv: rows out of order", lineno, 1);
    if (v[1] < 0 || v[1] != std::floor(v[1]) || v[1] >= static_cast<double>(table.size()))
      throw ParseError("orbit csv: bad scatterer index", lineno, static_cast<int>(cells[0].size()) + 2);
    seq.push_back(static_cast<std::size_t>(v[1]));
    phi.push_back(v[2]);
    alpha.push_back(v[3]);
    omega.push_back(v[4]);
    s.push_back(v[5]);
  }
  if (seq.size() < 2) throw ParseError("orbit csv: an orbit needs at least 2 rows", lineno, 1);

  SymbolSequence sequence = [&] {
    try {
      return SymbolSequence(seq);
    } catch (const DomainError& e) {
      throw ParseError(std::string("orbit csv: ") + e.what(), lineno, 1);
    }
  }();
  SolveOptions opt;
  opt.initial_phi = phi;
  opt.check_admissibility = false;
  SolveResult r = solve_periodic(table, sequence, opt);
  if (!r.orbit || r.status == SolveStatus::no_orbit)
    throw ParseError("orbit csv: the stored orbit does not solve on this table");
  const PeriodicOrbit& o = *r.orbit;
  for (int k = 0; k < o.period(); ++k) {
    const bool same = std::abs(angle_diff(o.states[k].phi, phi[k])) < 1e-9 &&
                      std::abs(o.states[k].alpha - alpha[k]) < 1e-9 &&
                      std::abs(angle_diff(o.omega[k], omega[k])) < 1e-9 && std::abs(o.lengths[k] - s[k]) < 1e-9;
    if (!same) throw ParseError("orbit csv: row does not match the periodic orbit on this table", k + 2, 1);
  }
  return o;
}

}  // namespace graze
