#include "locsched/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace locsched {

namespace {

double rect_distance(const Rect& r, double x, double y) {
  const double dx = std::max({r.x0 - x, 0.0, x - r.x1});
  const double dy = std::max({r.y0 - y, 0.0, y - r.y1});
  return std::hypot(dx, dy);
}

struct Seg {
  double ax, ay, bx, by;
};

double point_segment_distance(double px, double py, const Seg& s) {
  const double vx = s.bx - s.ax, vy = s.by - s.ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - s.ax) * vx + (py - s.ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (s.ax + t * vx), py - (s.ay + t * vy));
}

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

bool segments_intersect(const Seg& a, const Seg& b) {
  const double d1 = cross(b.bx - b.ax, b.by - b.ay, a.ax - b.ax, a.ay - b.ay);
  const double d2 = cross(b.bx - b.ax, b.by - b.ay, a.bx - b.ax, a.by - b.ay);
  const double d3 = cross(a.bx - a.ax, a.by - a.ay, b.ax - a.ax, b.ay - a.ay);
  const double d4 = cross(a.bx - a.ax, a.by - a.ay, b.bx - a.ax, b.by - a.ay);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

std::array<std::array<double, 2>, 4> oriented_corners(double x, double y, double heading, double w, double h) {
  const double c = std::cos(heading), s = std::sin(heading);
  const double hw = 0.5 * w, hh = 0.5 * h;
  std::array<std::array<double, 2>, 4> out{};
  const double sx[4] = {hw, -hw, -hw, hw};
  const double sy[4] = {hh, hh, -hh, -hh};
  for (int k = 0; k < 4; ++k) out[k] = {x + c * sx[k] - s * sy[k], y + s * sx[k] + c * sy[k]};
  return out;
}

bool point_in_quad(const std::array<std::array<double, 2>, 4>& q, double px, double py) {
  bool pos = false, neg = false;
  for (int k = 0; k < 4; ++k) {
    const auto& a = q[k];
    const auto& b = q[(k + 1) % 4];
    const double c = cross(b[0] - a[0], b[1] - a[1], px - a[0], py - a[1]);
    pos |= c > 0;
    neg |= c < 0;
  }
  return !(pos && neg);
}

bool oriented_rect_hits(const Shape& obstacle, double x, double y, double heading, const RobotFootprint& fp) {
  const auto q = oriented_corners(x, y, heading, fp.width, fp.height);
  if (const auto* c = std::get_if<Circle>(&obstacle)) {
    if (point_in_quad(q, c->cx, c->cy)) return true;
    for (int k = 0; k < 4; ++k) {
      Seg e{q[k][0], q[k][1], q[(k + 1) % 4][0], q[(k + 1) % 4][1]};
      if (point_segment_distance(c->cx, c->cy, e) <= c->r) return true;
    }
    return false;
  }
  const Rect& r = std::get<Rect>(obstacle);
  for (const auto& p : q) {
    if (p[0] >= r.x0 && p[0] <= r.x1 && p[1] >= r.y0 && p[1] <= r.y1) return true;
  }
  const std::array<std::array<double, 2>, 4> rc{{{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}}};
  for (const auto& p : rc) {
    if (point_in_quad(q, p[0], p[1])) return true;
  }
  for (int a = 0; a < 4; ++a) {
    Seg ea{q[a][0], q[a][1], q[(a + 1) % 4][0], q[(a + 1) % 4][1]};
    for (int b = 0; b < 4; ++b) {
      Seg eb{rc[b][0], rc[b][1], rc[(b + 1) % 4][0], rc[(b + 1) % 4][1]};
      if (segments_intersect(ea, eb)) return true;
    }
  }
  return false;
}

}  // namespace

double distance_to(const Shape& s, double x, double y) {
  if (const auto* r = std::get_if<Rect>(&s)) return rect_distance(*r, x, y);
  const Circle& c = std::get<Circle>(s);
  return std::max(0.0, std::hypot(x - c.cx, y - c.cy) - c.r);
}

bool contains(const Shape& s, double x, double y) {
  if (const auto* r = std::get_if<Rect>(&s)) return x >= r->x0 && x <= r->x1 && y >= r->y0 && y <= r->y1;
  const Circle& c = std::get<Circle>(s);
  const double dx = x - c.cx, dy = y - c.cy;
  return dx * dx + dy * dy <= c.r * c.r;
}

bool in_collision_xy(double x, double y, double heading, const RobotFootprint& fp, const Workspace& ws) {
  const Rect& b = ws.bounds;
  switch (fp.kind) {
    case RobotFootprint::Kind::Point:
      if (x < b.x0 || x > b.x1 || y < b.y0 || y > b.y1) return true;
      for (const Shape& o : ws.obstacles) {
        if (contains(o, x, y)) return true;
      }
      return false;
    case RobotFootprint::Kind::Disc:
      if (x - fp.radius < b.x0 || x + fp.radius > b.x1 || y - fp.radius < b.y0 || y + fp.radius > b.y1) return true;
      for (const Shape& o : ws.obstacles) {
        if (distance_to(o, x, y) <= fp.radius) return true;
      }
      return false;
    case RobotFootprint::Kind::Rectangle: {
      for (const auto& p : oriented_corners(x, y, heading, fp.width, fp.height)) {
        if (p[0] < b.x0 || p[0] > b.x1 || p[1] < b.y0 || p[1] > b.y1) return true;
      }
      for (const Shape& o : ws.obstacles) {
        if (oriented_rect_hits(o, x, y, heading, fp)) return true;
      }
      return false;
    }
  }
  return false;
}

bool in_collision(const Vec& state, const RobotFootprint& fp, const Workspace& ws) {
  const double heading = state.size() >= 4 ? state(3) : 0.0;
  return in_collision_xy(state(0), state(1), heading, fp, ws);
}

bool in_target(const Vec& state, const RobotFootprint&, const Workspace& ws) {
  return contains(ws.target, state(0), state(1));
}

void validate_workspace(const Workspace& ws) {
  const Rect& b = ws.bounds;
  if (!(b.x1 > b.x0 && b.y1 > b.y0)) throw InvalidInput("workspace bounds are empty");
  auto inside = [&](const Shape& s) {
    if (const auto* r = std::get_if<Rect>(&s)) {
      return r->x0 >= b.x0 && r->x1 <= b.x1 && r->y0 >= b.y0 && r->y1 <= b.y1 && r->x1 >= r->x0 && r->y1 >= r->y0;
    }
    const Circle& c = std::get<Circle>(s);
    return c.r >= 0 && c.cx - c.r >= b.x0 && c.cx + c.r <= b.x1 && c.cy - c.r >= b.y0 && c.cy + c.r <= b.y1;
  };
  for (std::size_t k = 0; k < ws.obstacles.size(); ++k) {
    if (!inside(ws.obstacles[k])) throw InvalidInput("obstacle " + std::to_string(k) + " leaves the workspace bounds");
  }
  if (!inside(ws.target)) throw InvalidInput("target leaves the workspace bounds");
  // Sampled overlap test: target boundary and interior grid against obstacles.
  constexpr int kGrid = 24;
  double tx0, ty0, tx1, ty1;
  if (const auto* r = std::get_if<Rect>(&ws.target)) {
    tx0 = r->x0, ty0 = r->y0, tx1 = r->x1, ty1 = r->y1;
  } else {
    const Circle& c = std::get<Circle>(ws.target);
    tx0 = c.cx - c.r, ty0 = c.cy - c.r, tx1 = c.cx + c.r, ty1 = c.cy + c.r;
  }
  for (int a = 0; a <= kGrid; ++a) {
    for (int c = 0; c <= kGrid; ++c) {
      const double x = tx0 + (tx1 - tx0) * a / kGrid;
      const double y = ty0 + (ty1 - ty0) * c / kGrid;
      if (!contains(ws.target, x, y)) continue;
      for (const Shape& o : ws.obstacles) {
        if (distance_to(o, x, y) < 1e-12) throw InvalidInput("target intersects an obstacle");
      }
    }
  }
}

}  // namespace locsched
