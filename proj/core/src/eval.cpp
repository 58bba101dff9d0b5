#include "camp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace camp {

const char* to_string(ManeuverCategory category) {
  switch (category) {
    case ManeuverCategory::no_traffic: return "no_traffic";
    case ManeuverCategory::merge_before: return "merge_before";
    case ManeuverCategory::merge_behind: return "merge_behind";
    case ManeuverCategory::gap_class1: return "gap_class1";
    case ManeuverCategory::gap_class2: return "gap_class2";
    case ManeuverCategory::stop_then_merge: return "stop_then_merge";
  }
  return "unknown";
}

JerkStats jerk_stats(const std::vector<double>& accel, double dt, double window) {
  JerkStats stats;
  std::size_t n = accel.size();
  if (n < 3 || dt <= 0.0) return stats;

  std::vector<double> jerk(n, 0.0);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    jerk[k] = (accel[k + 1] - accel[k - 1]) / (2.0 * dt);
  }
  jerk[0] = (accel[1] - accel[0]) / dt;
  jerk[n - 1] = (accel[n - 1] - accel[n - 2]) / dt;

  int half = std::max(1, static_cast<int>(std::lround(window / dt))) / 2;
  stats.smoothed.resize(n, 0.0);
  double sq_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t lo = k >= static_cast<std::size_t>(half) ? k - half : 0;
    std::size_t hi = std::min(n - 1, k + static_cast<std::size_t>(half));
    double acc = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) acc += jerk[i];
    double val = acc / static_cast<double>(hi - lo + 1);
    stats.smoothed[k] = val;
    stats.max_abs = std::max(stats.max_abs, std::abs(val));
    sq_sum += val * val;
  }
  stats.rms = std::sqrt(sq_sum / static_cast<double>(n));
  return stats;
}

double lane_clearance(const BoundingBox& box, const ReferencePath& left_boundary,
                      const ReferencePath& right_boundary) {
  auto corners = bbox_corners(box);  // FL, FR, RR, RL
  double clearance = std::numeric_limits<double>::infinity();
  // left-side corners against the left boundary (must stay right of it)
  clearance = std::min(clearance, -project_to_frenet(left_boundary, corners[0]).d);
  clearance = std::min(clearance, -project_to_frenet(left_boundary, corners[3]).d);
  // right-side corners against the right boundary (must stay left of it)
  clearance = std::min(clearance, project_to_frenet(right_boundary, corners[1]).d);
  clearance = std::min(clearance, project_to_frenet(right_boundary, corners[2]).d);
  return clearance;
}

ManeuverCategory categorize_maneuver(const Scenario& sc, const SimLog& log) {
  if (sc.rules.junctions.empty()) return ManeuverCategory::no_traffic;
  const YieldJunction& jn = sc.rules.junctions.front();

  double t_ego = -1.0;
  double standstill = 0.0;
  double min_approach_v = std::numeric_limits<double>::infinity();
  for (const auto& frame : log.frames) {
    if (t_ego < 0.0 && frame.ego_s >= jn.conflict_lo) t_ego = frame.t;
    if (frame.ego_s < jn.s_stop) min_approach_v = std::min(min_approach_v, frame.ego.v);
    if (frame.ego.v < 0.1 && frame.ego_s > jn.s_stop - 5.0 && frame.ego_s < jn.s_stop + 0.5) {
      standstill += sc.sim_dt;
    }
  }
  bool stopped_at_line = standstill >= 0.4;
  if (stopped_at_line) return ManeuverCategory::stop_then_merge;
  if (t_ego < 0.0) return ManeuverCategory::stop_then_merge;  // never merged

  // Truth crossing times of main-road traffic at the conflict entry.
  double conflict_lo_main = jn.conflict_lo + jn.main_offset;
  std::map<std::string, double> crossing;
  for (const auto& frame : log.frames) {
    for (const auto& actor : frame.actors) {
      if (actor.lane != "main" || !actor.active) continue;
      if (actor.s >= conflict_lo_main && !crossing.count(actor.id)) {
        crossing[actor.id] = frame.t;
      }
    }
  }

  const double window = 12.0;
  bool before = false, after = false;
  for (const auto& [id, t] : crossing) {
    if (t < t_ego && t >= t_ego - window) before = true;
    if (t > t_ego && t <= t_ego + window) after = true;
  }

  double curve_speed = std::numeric_limits<double>::infinity();
  SpeedProfile raw = speed_limit_profile(sc.ego_path, sc.rules.v_sl,
                                         sc.constraints.a_perp_max);
  for (double s = jn.s_stop; s < jn.s_pga; s += 0.5) {
    curve_speed = std::min(curve_speed, raw.at(s));
  }
  bool dipped = min_approach_v < 0.9 * curve_speed;

  if (before && after) return dipped ? ManeuverCategory::gap_class2 : ManeuverCategory::gap_class1;
  if (before) return ManeuverCategory::merge_behind;
  if (after) return ManeuverCategory::merge_before;
  return ManeuverCategory::no_traffic;
}

ManeuverRecord evaluate_run(const Scenario& sc, const SimLog& log) {
  ManeuverRecord rec;
  rec.category = categorize_maneuver(sc, log);
  rec.reached = log.t_goal >= 0.0;
  rec.t_goal = log.t_goal;

  // lane boundaries as offset paths of the ego reference
  ReferencePath left = build_path(offset_polyline(sc.ego_path, sc.lane_width / 2.0), 0.5);
  ReferencePath right = build_path(offset_polyline(sc.ego_path, -sc.lane_width / 2.0), 0.5);

  rec.min_clearance = std::numeric_limits<double>::infinity();
  rec.min_approach_v = std::numeric_limits<double>::infinity();
  double rear_to_center = 0.5 * sc.vehicle.wheelbase;
  std::vector<double> accel;
  accel.reserve(log.frames.size());

  double s_stop = sc.rules.junctions.empty() ? std::numeric_limits<double>::infinity()
                                             : sc.rules.junctions.front().s_stop;
  for (const auto& frame : log.frames) {
    BoundingBox box;
    box.center = {frame.ego.x + rear_to_center * std::cos(frame.ego.heading),
                  frame.ego.y + rear_to_center * std::sin(frame.ego.heading)};
    box.heading = frame.ego.heading;
    box.length = sc.vehicle.length;
    box.width = sc.vehicle.width;
    double c = lane_clearance(box, left, right);
    rec.min_clearance = std::min(rec.min_clearance, c);
    if (c < 0.0) ++rec.frames_outside_lane;

    if (frame.ego_s < s_stop) rec.min_approach_v = std::min(rec.min_approach_v, frame.ego.v);
    if (frame.ego.v < 0.1 && frame.ego_s > s_stop - 5.0 && frame.ego_s < s_stop + 0.5) {
      rec.standstill_time += sc.sim_dt;
    }
    accel.push_back(frame.ego.a);
  }

  auto stats = jerk_stats(accel, sc.sim_dt);
  rec.max_abs_jerk = stats.max_abs;
  rec.rms_jerk = stats.rms;
  return rec;
}

}  // namespace camp
