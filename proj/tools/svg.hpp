#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graze/geometry.hpp"
#include "graze/orbits.hpp"

namespace graze::cli {

/// Table, trajectories and markers as a static SVG, y axis pointing up.
class SvgScene {
 public:
  explicit SvgScene(const BilliardTable& table, std::optional<std::size_t> highlight = std::nullopt);

  void orbit(const PeriodicOrbit& orbit, const std::string& color = "#1f4e9c");
  void path(const std::vector<Vec2>& points, const std::string& color = "#b03a2e");
  void marker(Vec2 p, const std::string& label, const std::string& color = "#b03a2e");
  void ghost_disk(Vec2 c, const std::string& color = "#999999");

  std::string str() const;

 private:
  BilliardTable table_;
  std::optional<std::size_t> highlight_;
  std::vector<std::string> items_;
  std::vector<Vec2> extent_;
};

}  // namespace graze::cli
