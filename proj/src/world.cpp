#include "mmppi/world.hpp"

#include <algorithm>
#include <limits>

#include "mmppi/errors.hpp"

namespace mmppi {

PathReference::PathReference(const std::vector<Vec2> & waypoints, const std::vector<double> & v_des, double spacing)
: waypoints_(waypoints), spacing_(spacing)
{
  if (waypoints.size() < 2) {
    throw ConfigError("path needs at least two waypoints", "path.waypoints");
  }
  if (v_des.size() != 1 && v_des.size() != waypoints.size()) {
    throw ConfigError("path.v_des must have one entry or one per waypoint", "path.v_des");
  }
  if (!(spacing > 0.0 && spacing <= 0.5)) {
    throw ConfigError("path resampling spacing must lie in (0, 0.5] m", "path.spacing");
  }

  std::vector<double> s(waypoints.size(), 0.0);
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const double seg = (waypoints[i] - waypoints[i - 1]).norm();
    if (!(seg > 0.0)) {
      throw ConfigError("path arc length must be strictly increasing", "path.waypoints");
    }
    s[i] = s[i - 1] + seg;
  }
  length_ = s.back();

  auto speed_at = [&](std::size_t i, double frac) {
      if (v_des.size() == 1) {
        return v_des.front();
      }
      return v_des[i] + frac * (v_des[i + 1] - v_des[i]);
    };

  const auto count = static_cast<std::size_t>(std::ceil(length_ / spacing_)) + 1;
  samples_.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double sk = std::min(static_cast<double>(k) * spacing_, length_);
    while (seg + 2 < s.size() && s[seg + 1] < sk) {
      ++seg;
    }
    const Vec2 a = waypoints[seg];
    const Vec2 b = waypoints[seg + 1];
    const double len = s[seg + 1] - s[seg];
    const double frac = std::clamp((sk - s[seg]) / len, 0.0, 1.0);
    samples_.push_back({a + (b - a) * frac, (b - a) * (1.0 / len), speed_at(seg, frac)});
  }
  // Central-difference tangents so curved paths interpolate smoothly.
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const Vec2 prev = samples_[k == 0 ? 0 : k - 1].position;
    const Vec2 next = samples_[std::min(k + 1, samples_.size() - 1)].position;
    const Vec2 d = next - prev;
    if (d.norm() > 0.0) {
      samples_[k].tangent = d * (1.0 / d.norm());
    }
  }
}

PathReference::Sample PathReference::at(double s) const
{
  if (samples_.empty()) {
    throw ConfigError("empty path", "path");
  }
  const double clamped = std::clamp(s, 0.0, length_);
  const double pos = clamped / spacing_;
  auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= samples_.size()) {
    return samples_.back();
  }
  const double frac = pos - static_cast<double>(i);
  const Sample & a = samples_[i];
  const Sample & b = samples_[i + 1];
  Vec2 tangent = a.tangent + (b.tangent - a.tangent) * frac;
  tangent = tangent * (1.0 / tangent.norm());
  return {a.position + (b.position - a.position) * frac, tangent, a.v_des + frac * (b.v_des - a.v_des)};
}

double PathReference::project(Vec2 p) const
{
  double best = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  double s0 = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    const Vec2 a = waypoints_[i];
    const Vec2 d = waypoints_[i + 1] - a;
    const double len = d.norm();
    const double t = std::clamp((p - a).dot(d) / (len * len), 0.0, 1.0);
    const double dist = (p - (a + d * t)).norm();
    if (dist < best) {
      best = dist;
      best_s = s0 + t * len;
    }
    s0 += len;
  }
  return best_s;
}

double RoadEdge::signed_distance(Vec2 p) const
{
  double best = std::numeric_limits<double>::infinity();
  double sign = 1.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const Vec2 a = points[i];
    const Vec2 d = points[i + 1] - a;
    const double t = std::clamp((p - a).dot(d) / d.dot(d), 0.0, 1.0);
    const Vec2 rel = p - (a + d * t);
    const double dist = rel.norm();
    if (dist < best) {
      best = dist;
      const double side = d.cross(p - a);
      sign = (side >= 0.0) == inside_left ? 1.0 : -1.0;
    }
  }
  return sign * best;
}

}  // namespace mmppi
