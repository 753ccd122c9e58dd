#pragma once

#include "locsched/types.hpp"

#include <variant>
#include <vector>

namespace locsched {

struct Rect {
  double x0, y0, x1, y1;
};

struct Circle {
  double cx, cy, r;
};

using Shape = std::variant<Rect, Circle>;

struct Workspace {
  Rect bounds{0, 0, 10, 10};
  std::vector<Shape> obstacles;
  Shape target = Rect{0, 0, 0, 0};
};

struct RobotFootprint {
  enum class Kind { Point, Disc, Rectangle };
  Kind kind = Kind::Point;
  double radius = 0.0;
  double width = 0.0;   // along heading
  double height = 0.0;  // across heading
};

/// Distance from (x, y) to a closed shape; zero inside.
double distance_to(const Shape& s, double x, double y);

bool contains(const Shape& s, double x, double y);

/// Collision test for a footprint centered at the state's position. The
/// heading (state component 3) is used only for rectangular footprints.
bool in_collision(const Vec& state, const RobotFootprint& fp, const Workspace& ws);

bool in_collision_xy(double x, double y, double heading, const RobotFootprint& fp, const Workspace& ws);

/// Target membership of the footprint center; the region is closed.
bool in_target(const Vec& state, const RobotFootprint& fp, const Workspace& ws);

/// Checks the workspace invariants (shapes inside bounds, target clear of obstacles).
void validate_workspace(const Workspace& ws);

}  // namespace locsched
