#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

namespace mmppi {

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const {return {x + o.x, y + o.y};}
  Vec2 operator-(Vec2 o) const {return {x - o.x, y - o.y};}
  Vec2 operator*(double s) const {return {x * s, y * s};}
  double dot(Vec2 o) const {return x * o.x + y * o.y;}
  double cross(Vec2 o) const {return x * o.y - y * o.x;}
  double norm() const {return std::hypot(x, y);}
  bool operator==(const Vec2 &) const = default;
};

/// Reference path resampled at uniform arc-length spacing for O(1) lookup.
class PathReference
{
public:
  struct Sample
  {
    Vec2 position;
    Vec2 tangent;  // unit
    double v_des = 0.0;
  };

  PathReference() = default;

  /// `waypoints` must have strictly increasing cumulative arc length.
  /// `v_des` holds one desired speed per waypoint (or a single value).
  PathReference(const std::vector<Vec2> & waypoints, const std::vector<double> & v_des, double spacing = 0.25);

  bool empty() const {return samples_.empty();}
  double length() const {return length_;}
  double spacing() const {return spacing_;}

  /// Interpolated sample at arc length s (clamped to the path domain).
  Sample at(double s) const;

  /// Arc length of the point on the path closest to p.
  double project(Vec2 p) const;

  const std::vector<Vec2> & waypoints() const {return waypoints_;}

private:
  std::vector<Vec2> waypoints_;
  std::vector<Sample> samples_;
  double spacing_ = 0.25;
  double length_ = 0.0;
};

/// Circle obstacle. Velocity is used to extrapolate it over the horizon.
struct Obstacle
{
  Vec2 center;
  double radius = 1.0;
  Vec2 velocity;
  bool visible = true;

  Vec2 position_at(double dt) const {return center + velocity * dt;}
};

/// Vehicle covered by circles placed along the body x-axis.
struct EgoFootprint
{
  std::vector<double> offsets{-1.0, 1.0};
  double radius = 1.0;

  template<typename Fn>
  void for_each_circle(double X, double Y, double psi, Fn && fn) const
  {
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    for (double off : offsets) {
      fn(Vec2{X + off * c, Y + off * s});
    }
  }
};

/// Polyline road boundary. `inside_left` tells which side of the travel
/// direction is drivable: true means the road lies to the left of the line.
struct RoadEdge
{
  std::vector<Vec2> points;
  bool inside_left = true;

  /// Signed distance of p to the edge, positive on the drivable side.
  double signed_distance(Vec2 p) const;
};

struct RoadEdges
{
  RoadEdge left;   // road lies to its right
  RoadEdge right;  // road lies to its left

  std::array<const RoadEdge *, 2> both() const {return {&left, &right};}
};

/// What the planner is allowed to see at one planning instant.
struct WorldSnapshot
{
  std::vector<Obstacle> obstacles;  // visible only
  RoadEdges edges;
  std::shared_ptr<const PathReference> path;
};

}  // namespace mmppi
