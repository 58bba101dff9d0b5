#include "camp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace camp {

namespace {

// Index of the sample interval containing s (clamped to the valid range).
size_t interval_index(const std::vector<PathSample>& samples, double s) {
  if (s <= samples.front().s) return 0;
  if (s >= samples[samples.size() - 2].s) return samples.size() - 2;
  auto it = std::upper_bound(samples.begin(), samples.end(), s,
                             [](double v, const PathSample& p) { return v < p.s; });
  return static_cast<size_t>(it - samples.begin()) - 1;
}

}  // namespace

Vec2 ReferencePath::position_at(double s) const {
  const size_t i = interval_index(samples, s);
  const PathSample& a = samples[i];
  const PathSample& b = samples[i + 1];
  const double t = (s - a.s) / (b.s - a.s);
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

double ReferencePath::heading_at(double s) const {
  const size_t i = interval_index(samples, s);
  const PathSample& a = samples[i];
  const PathSample& b = samples[i + 1];
  const double t = (s - a.s) / (b.s - a.s);
  return a.heading + (b.heading - a.heading) * t;
}

double ReferencePath::curvature_at(double s) const {
  const size_t i = interval_index(samples, s);
  const PathSample& a = samples[i];
  const PathSample& b = samples[i + 1];
  const double t = (s - a.s) / (b.s - a.s);
  return a.curvature + (b.curvature - a.curvature) * t;
}

Vec2 ReferencePath::tangent_at(double s) const {
  const double h = heading_at(s);
  return {std::cos(h), std::sin(h)};
}

ReferencePath build_path(const std::vector<Vec2>& waypoints, double resample_step) {
  if (resample_step <= 0.0) throw DegeneratePath("resample_step must be positive");

  std::vector<Vec2> pts;
  pts.reserve(waypoints.size());
  for (const Vec2& p : waypoints) {
    if (pts.empty() || (p - pts.back()).norm() > 1e-12) pts.push_back(p);
  }
  if (pts.size() < 2) throw DegeneratePath("need at least two distinct waypoints");

  std::vector<double> cum(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i) {
    cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  }
  const double total = cum.back();
  if (total < 1e-9) throw DegeneratePath("path has zero length");

  // Resample grid: multiples of resample_step plus the exact endpoint.
  std::vector<double> grid;
  for (double s = 0.0; s < total - 1e-9; s += resample_step) grid.push_back(s);
  grid.push_back(total);

  ReferencePath path;
  path.total_length = total;
  path.samples.resize(grid.size());

  size_t seg = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    while (seg + 2 < cum.size() && cum[seg + 1] < s) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (s - cum[seg]) / seg_len : 0.0;
    PathSample& out = path.samples[i];
    out.s = s;
    out.x = pts[seg].x + (pts[seg + 1].x - pts[seg].x) * t;
    out.y = pts[seg].y + (pts[seg + 1].y - pts[seg].y) * t;
  }

  // Headings from central differences on the resampled points, then unwrapped
  // so interpolation across the +-pi seam stays continuous.
  const size_t n = path.samples.size();
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i == 0 ? 0 : i - 1;
    const size_t hi = i + 1 < n ? i + 1 : i;
    const double dx = path.samples[hi].x - path.samples[lo].x;
    const double dy = path.samples[hi].y - path.samples[lo].y;
    path.samples[i].heading = std::atan2(dy, dx);
  }
  for (size_t i = 1; i < n; ++i) {
    double& h = path.samples[i].heading;
    const double prev = path.samples[i - 1].heading;
    h = prev + wrap_angle(h - prev);
  }

  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i == 0 ? 0 : i - 1;
    const size_t hi = i + 1 < n ? i + 1 : i;
    const double ds = path.samples[hi].s - path.samples[lo].s;
    path.samples[i].curvature =
        ds > 0.0 ? (path.samples[hi].heading - path.samples[lo].heading) / ds : 0.0;
  }
  if (n >= 3) {
    // Endpoint stencils are one-sided and noisy; copy the interior neighbor.
    path.samples[0].curvature = path.samples[1].curvature;
    path.samples[n - 1].curvature = path.samples[n - 2].curvature;
  }
  return path;
}

namespace {

size_t nearest_sample(const ReferencePath& path, Vec2 p, int hint) {
  const auto& smp = path.samples;
  const size_t n = smp.size();
  auto dist2 = [&](size_t i) {
    const double dx = p.x - smp[i].x;
    const double dy = p.y - smp[i].y;
    return dx * dx + dy * dy;
  };

  if (hint >= 0 && static_cast<size_t>(hint) < n) {
    // Local descent around the hint; falls back to a global scan if the local
    // window does not contain a clear minimum basin.
    size_t i = static_cast<size_t>(hint);
    while (i > 0 && dist2(i - 1) < dist2(i)) --i;
    while (i + 1 < n && dist2(i + 1) < dist2(i)) ++i;
    // Guard against multi-basin paths: accept if strictly better than both
    // window edges some distance away.
    const size_t lo = i >= 12 ? i - 12 : 0;
    const size_t hi = std::min(i + 12, n - 1);
    if (dist2(i) <= dist2(lo) && dist2(i) <= dist2(hi)) return i;
  }

  size_t best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (size_t i = 0; i < n; ++i) {
    const double d = dist2(i);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

struct FootPoint {
  double s;
  double d;
  double dist;
  size_t seg;
  double t;  // clamped segment parameter
};

FootPoint project_on_segment(const ReferencePath& path, size_t seg, Vec2 p) {
  const PathSample& a = path.samples[seg];
  const PathSample& b = path.samples[seg + 1];
  const Vec2 pa{p.x - a.x, p.y - a.y};
  const Vec2 ab{b.x - a.x, b.y - a.y};
  const double len2 = ab.dot(ab);
  double t = len2 > 0.0 ? pa.dot(ab) / len2 : 0.0;
  // The frame extends linearly beyond the endpoints, so only the lateral
  // offset counts against the corridor there.
  const double t_lo = seg == 0 ? std::numeric_limits<double>::lowest() : 0.0;
  const double t_hi = seg + 2 == path.samples.size() ? std::numeric_limits<double>::max() : 1.0;
  t = std::clamp(t, t_lo, t_hi);
  const Vec2 foot{a.x + ab.x * t, a.y + ab.y * t};
  const Vec2 off{p.x - foot.x, p.y - foot.y};
  const double len = std::sqrt(len2);
  const Vec2 tan = len > 0.0 ? Vec2{ab.x / len, ab.y / len} : Vec2{1.0, 0.0};
  FootPoint fp;
  fp.seg = seg;
  fp.t = t;
  fp.s = a.s + (b.s - a.s) * t;
  fp.d = tan.cross(off);
  fp.dist = off.norm();
  return fp;
}

FootPoint project_impl(const ReferencePath& path, Vec2 p, int* hint, double corridor) {
  const size_t n = path.samples.size();
  const size_t near = nearest_sample(path, p, hint ? *hint : -1);
  if (hint) *hint = static_cast<int>(near);

  FootPoint best{0.0, 0.0, std::numeric_limits<double>::max(), 0, 0.0};
  const size_t first = near > 0 ? near - 1 : 0;
  const size_t last = std::min(near, n - 2);
  for (size_t seg = first; seg <= last; ++seg) {
    const FootPoint fp = project_on_segment(path, seg, p);
    // Tie between adjacent segments resolves toward smaller s.
    if (fp.dist < best.dist - 1e-12 ||
        (std::abs(fp.dist - best.dist) <= 1e-12 && fp.s < best.s)) {
      best = fp;
    }
  }
  if (best.dist > corridor) throw OutOfCorridor("point beyond corridor half-width");
  return best;
}

}  // namespace

FrenetPose project_to_frenet(const ReferencePath& path, Vec2 point, double corridor) {
  const FootPoint fp = project_impl(path, point, nullptr, corridor);
  return {fp.s, fp.d};
}

ProjectionDetail project_detailed(const ReferencePath& path, Vec2 point, int* hint,
                                  double corridor) {
  const FootPoint fp = project_impl(path, point, hint, corridor);
  const PathSample& a = path.samples[fp.seg];
  const PathSample& b = path.samples[fp.seg + 1];
  const Vec2 ab{b.x - a.x, b.y - a.y};
  const double len = ab.norm();

  ProjectionDetail out;
  out.s = fp.s;
  out.d = fp.d;
  out.tangent = len > 0.0 ? Vec2{ab.x / len, ab.y / len} : Vec2{1.0, 0.0};
  out.normal = {-out.tangent.y, out.tangent.x};
  const double ds = b.s - a.s;
  out.dheading_ds = ds > 0.0 ? (b.heading - a.heading) / ds : 0.0;
  out.heading_ref = a.heading + (fp.s - a.s) * out.dheading_ds;
  return out;
}

std::array<Vec2, 4> bbox_corners(const BoundingBox& box) {
  const Vec2 dir{std::cos(box.heading), std::sin(box.heading)};
  const Vec2 nrm{-dir.y, dir.x};
  const Vec2 f = dir * (box.length * 0.5);
  const Vec2 l = nrm * (box.width * 0.5);
  return {
      box.center + f + l,  // front-left
      box.center + f - l,  // front-right
      box.center - f - l,  // rear-right
      box.center - f + l,  // rear-left
  };
}

bool boxes_intersect(const BoundingBox& a, const BoundingBox& b) {
  const std::array<Vec2, 4> ca = bbox_corners(a);
  const std::array<Vec2, 4> cb = bbox_corners(b);
  const std::array<Vec2, 4> axes = {
      Vec2{std::cos(a.heading), std::sin(a.heading)},
      Vec2{-std::sin(a.heading), std::cos(a.heading)},
      Vec2{std::cos(b.heading), std::sin(b.heading)},
      Vec2{-std::sin(b.heading), std::cos(b.heading)},
  };
  for (const Vec2& axis : axes) {
    double lo_a = std::numeric_limits<double>::max(), hi_a = -lo_a;
    double lo_b = lo_a, hi_b = hi_a;
    for (int i = 0; i < 4; ++i) {
      const double pa = ca[i].dot(axis);
      const double pb = cb[i].dot(axis);
      lo_a = std::min(lo_a, pa);
      hi_a = std::max(hi_a, pa);
      lo_b = std::min(lo_b, pb);
      hi_b = std::max(hi_b, pb);
    }
    if (hi_a < lo_b || hi_b < lo_a) return false;
  }
  return true;
}

std::vector<Vec2> offset_polyline(const ReferencePath& path, double lateral_offset) {
  std::vector<Vec2> out;
  out.reserve(path.samples.size());
  for (const PathSample& p : path.samples) {
    const Vec2 nrm{-std::sin(p.heading), std::cos(p.heading)};
    out.push_back({p.x + nrm.x * lateral_offset, p.y + nrm.y * lateral_offset});
  }
  return out;
}

std::vector<Vec2> expand_segments(Vec2 start, double start_heading,
                                  const std::vector<PathSegmentSpec>& segments,
                                  double max_spacing) {
  std::vector<Vec2> pts{start};
  Vec2 pos = start;
  double heading = start_heading;
  for (const PathSegmentSpec& seg : segments) {
    if (seg.kind == PathSegmentSpec::Kind::straight) {
      const int n = std::max(1, static_cast<int>(std::ceil(seg.length / max_spacing)));
      const Vec2 dir{std::cos(heading), std::sin(heading)};
      for (int i = 1; i <= n; ++i) {
        pts.push_back(pos + dir * (seg.length * i / n));
      }
      pos = pts.back();
    } else {
      const double r = std::abs(seg.radius);
      const double sweep = seg.angle;
      const double arc_len = r * std::abs(sweep);
      const int n = std::max(2, static_cast<int>(std::ceil(arc_len / max_spacing)));
      const double side = seg.radius >= 0.0 ? 1.0 : -1.0;
      const Vec2 center{pos.x - side * r * std::sin(heading),
                        pos.y + side * r * std::cos(heading)};
      const double a0 = std::atan2(pos.y - center.y, pos.x - center.x);
      for (int i = 1; i <= n; ++i) {
        const double a = a0 + sweep * i / n;
        pts.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
      }
      pos = pts.back();
      heading += sweep;
    }
  }
  return pts;
}

bool point_in_polygon(const std::vector<Vec2>& polygon, Vec2 p) {
  bool inside = false;
  const size_t n = polygon.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

namespace {

bool segments_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
    const double v = (b - a).cross(c - a);
    return v > 1e-12 ? 1 : (v < -1e-12 ? -1 : 0);
  };
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  const auto on_seg = [](Vec2 a, Vec2 b, Vec2 c) {
    return std::min(a.x, b.x) - 1e-12 <= c.x && c.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= c.y && c.y <= std::max(a.y, b.y) + 1e-12;
  };
  if (o1 == 0 && on_seg(p1, p2, q1)) return true;
  if (o2 == 0 && on_seg(p1, p2, q2)) return true;
  if (o3 == 0 && on_seg(q1, q2, p1)) return true;
  if (o4 == 0 && on_seg(q1, q2, p2)) return true;
  return false;
}

}  // namespace

bool segment_intersects_polygon(const std::vector<Vec2>& polygon, Vec2 a, Vec2 b) {
  const size_t n = polygon.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    if (segments_cross(a, b, polygon[j], polygon[i])) return true;
  }
  // Fully inside counts as blocked as well.
  return point_in_polygon(polygon, a) || point_in_polygon(polygon, b);
}

}  // namespace camp
