#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace camp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

// Thrown when a waypoint list cannot form a usable path (fewer than two
// distinct points, or zero length).
class DegeneratePath : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a query point lies farther from the path than the corridor
// half-width.
class OutOfCorridor : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PathSample {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;    // unwrapped tangent angle, rad
  double curvature = 0.0;  // 1/m, signed (positive = left turn)
};

// Arc-length parameterized polyline resampled at a fixed step.
struct ReferencePath {
  std::vector<PathSample> samples;
  double total_length = 0.0;

  Vec2 position_at(double s) const;
  double heading_at(double s) const;   // unwrapped
  double curvature_at(double s) const;
  Vec2 tangent_at(double s) const;
};

// Resamples the waypoint polyline at resample_step, then attaches heading
// (central-difference tangent) and curvature (central-difference of heading
// over arc length). Consecutive duplicate waypoints are dropped.
ReferencePath build_path(const std::vector<Vec2>& waypoints, double resample_step);

struct FrenetPose {
  double s = 0.0;
  double d = 0.0;  // signed lateral offset, positive left of the path
};

// Projects a point onto the path. Ties between equidistant segments resolve
// toward smaller s. Throws OutOfCorridor beyond the corridor half-width.
FrenetPose project_to_frenet(const ReferencePath& path, Vec2 point,
                             double corridor = 20.0);

// Projection with the local derivatives needed by gradient-based consumers:
// ds/dp = tangent, dd/dp = normal, plus the interpolated reference heading
// and its slope at the foot point. hint, when >= 0, starts the nearest-sample
// search at that index and is updated to the matched index.
struct ProjectionDetail {
  double s = 0.0;
  double d = 0.0;
  Vec2 tangent;         // unit tangent of the matched segment
  Vec2 normal;          // left unit normal of the matched segment
  double heading_ref = 0.0;
  double dheading_ds = 0.0;
};
ProjectionDetail project_detailed(const ReferencePath& path, Vec2 point,
                                  int* hint = nullptr, double corridor = 20.0);

struct BoundingBox {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;
};

// Corners in the order front-left, front-right, rear-rear, rear-left,
// i.e. clockwise for heading 0 with y up.
std::array<Vec2, 4> bbox_corners(const BoundingBox& box);

// Overlap test for two oriented boxes (separating axes of both boxes).
bool boxes_intersect(const BoundingBox& a, const BoundingBox& b);

// Waypoints of the path shifted laterally (positive = left). Useful for
// deriving lane boundaries from a centerline.
std::vector<Vec2> offset_polyline(const ReferencePath& path, double lateral_offset);

// Piecewise path description used by scenario files: straights and arcs are
// expanded into waypoints spaced at most max_spacing apart.
struct PathSegmentSpec {
  enum class Kind { straight, arc } kind = Kind::straight;
  double length = 0.0;     // straight: meters
  double radius = 0.0;     // arc: signed, positive = left turn
  double angle = 0.0;      // arc: swept angle, rad, sign matches radius
};
std::vector<Vec2> expand_segments(Vec2 start, double start_heading,
                                  const std::vector<PathSegmentSpec>& segments,
                                  double max_spacing = 0.25);

inline double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

bool point_in_polygon(const std::vector<Vec2>& polygon, Vec2 p);
bool segment_intersects_polygon(const std::vector<Vec2>& polygon, Vec2 a, Vec2 b);

}  // namespace camp
