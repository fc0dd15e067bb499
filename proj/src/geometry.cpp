#include "graze/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "graze/errors.hpp"

namespace graze {

namespace {

// Rays starting on a disk boundary produce a root at t ~ 0 that must not
// count as a collision.
constexpr double kMinFlight = 1e-12;

std::string pair_name(const std::vector<std::string>& labels, std::size_t i) {
  if (i < labels.size() && !labels[i].empty()) return labels[i] + " (#" + std::to_string(i) + ")";
  return "#" + std::to_string(i);
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

BilliardTable::BilliardTable(std::vector<Vec2> centers, std::vector<std::string> labels)
    : centers_(std::move(centers)), labels_(std::move(labels)) {
  if (centers_.size() < 2) throw InvalidStateError("a billiard table needs at least 2 scatterers");
  if (!labels_.empty() && labels_.size() != centers_.size())
    throw InvalidStateError("labels must match centers one-to-one");
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if (!std::isfinite(centers_[i].x) || !std::isfinite(centers_[i].y))
      throw InvalidStateError("non-finite center " + pair_name(labels_, i));
    for (std::size_t j = 0; j < i; ++j) {
      const double d = distance(centers_[i], centers_[j]);
      if (!(d > 2.0)) {
        std::ostringstream os;
        os << "scatterers " << pair_name(labels_, j) << " and " << pair_name(labels_, i)
           << " overlap: center distance " << d << " <= 2";
        throw OverlapError(os.str());
      }
    }
  }
}

double BilliardTable::min_gap() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) best = std::min(best, distance(centers_[i], centers_[j]) - 2.0);
  return best;
}

double BilliardTable::max_center_distance() const {
  double best = 0.0;
  for (std::size_t i = 0; i < centers_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) best = std::max(best, distance(centers_[i], centers_[j]));
  return best;
}

BilliardTable BilliardTable::with_center(std::size_t i, Vec2 c) const {
  auto centers = centers_;
  centers.at(i) = c;
  return BilliardTable(std::move(centers), labels_);
}

UCoords to_u(double phi, double alpha) {
  return {wrap_angle(phi - alpha), wrap_angle(phi + alpha + kPi)};
}

std::optional<AngleState> from_u(const UCoords& u) {
  // omega_in - omega_out = 2 alpha + pi (mod 2pi), with 2 alpha in (-pi, pi).
  const double two_alpha = wrap_signed(u.omega_in - u.omega_out - kPi);
  const double alpha = 0.5 * two_alpha;
  if (is_grazing(alpha)) return std::nullopt;
  return AngleState{wrap_angle(u.omega_out + alpha), alpha};
}

std::optional<Hit> next_collision(const BilliardTable& table, Vec2 origin, Vec2 direction,
                                  std::optional<std::size_t> exclude) {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Vec2 rel = origin - table.center(i);
    const double c = dot(rel, rel) - 1.0;
    if (exclude && *exclude == i) continue;
    if (c < -1e-12) throw InvalidStateError("ray origin lies inside scatterer #" + std::to_string(i));
    const double b = dot(direction, rel);
    const double disc = b * b - c;
    if (disc < 0.0) continue;
    // Stable roots of t^2 + 2 b t + c = 0.
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    double t0 = q;
    double t1 = q != 0.0 ? c / q : 0.0;
    if (t0 > t1) std::swap(t0, t1);
    if (t0 <= kMinFlight) continue;  // behind, or leaving through this disk
    if (best && t0 >= best->length) continue;
    const Vec2 p = origin + t0 * direction;
    const double phi = wrap_angle(angle_of(p - table.center(i)));
    Hit h;
    h.scatterer = i;
    h.point = p;
    h.length = t0;
    h.state = CollisionState{i, phi, incidence_angle(phi, angle_of(direction))};
    best = h;
  }
  return best;
}

std::optional<Vec2> reflect(const CollisionState& state, Vec2 incoming) {
  const Vec2 n = state.normal();
  const double dn = dot(incoming, n);
  if (std::abs(dn) <= std::cos(kPi / 2 - kGrazingTolerance)) return std::nullopt;
  return incoming - 2.0 * dn * n;
}

SegmentDistance point_segment_distance(Vec2 c, Vec2 p0, Vec2 p1) {
  const Vec2 d = p1 - p0;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(c - p0, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 foot = p0 + t * d;
  return {distance(c, foot), foot, t};
}

Clearance segment_clearance(const BilliardTable& table, Vec2 p0, Vec2 p1,
                            std::span<const std::size_t> skip) {
  Clearance best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (std::find(skip.begin(), skip.end(), i) != skip.end()) continue;
    const auto sd = point_segment_distance(table.center(i), p0, p1);
    if (sd.distance < best.distance) {
      best = Clearance{sd.distance, i, sd.foot, sd.t, true};
    }
  }
  return best;
}

Vec2 RigidMotion::apply(Vec2 p) const { return apply_direction(p) + translation; }

Vec2 RigidMotion::apply_direction(Vec2 v) const {
  if (reflect) v.y = -v.y;
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double RigidMotion::apply_angle(double a) const { return wrap_angle(rotation + (reflect ? -a : a)); }

RigidMotion RigidMotion::inverse() const {
  RigidMotion inv;
  inv.reflect = reflect;
  inv.rotation = reflect ? rotation : -rotation;
  inv.translation = -inv.apply_direction(translation);
  return inv;
}

RigidMotion RigidMotion::compose(const RigidMotion& other) const {
  RigidMotion r;
  r.rotation = rotation + (reflect ? -other.rotation : other.rotation);
  r.reflect = reflect != other.reflect;
  r.translation = apply(other.translation);
  return r;
}

BilliardTable transform(const BilliardTable& table, const RigidMotion& g) {
  std::vector<Vec2> centers;
  centers.reserve(table.size());
  for (const auto& c : table.centers()) centers.push_back(g.apply(c));
  return BilliardTable(std::move(centers), table.labels());
}

BilliardTable parse_scene(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(json_text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("scene: " + std::string(e.what()), line, col);
  }
  if (!doc.is_object() || !doc.contains("centers") || !doc["centers"].is_array())
    throw ParseError("scene: expected an object with a \"centers\" array");
  std::vector<Vec2> centers;
  for (const auto& c : doc["centers"]) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
      throw ParseError("scene: every center must be a [x, y] number pair");
    centers.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    if (!doc["labels"].is_array()) throw ParseError("scene: \"labels\" must be an array");
    for (const auto& l : doc["labels"]) {
      if (!l.is_string()) throw ParseError("scene: labels must be strings");
      labels.push_back(l.get<std::string>());
    }
  }
  return BilliardTable(std::move(centers), std::move(labels));
}

BilliardTable load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

std::string scene_to_json(const BilliardTable& table) {
  nlohmann::json doc;
  doc["centers"] = nlohmann::json::array();
  for (const auto& c : table.centers()) doc["centers"].push_back({c.x, c.y});
  if (!table.labels().empty()) doc["labels"] = table.labels();
  return doc.dump(2);
}

}  // namespace graze
