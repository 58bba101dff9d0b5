#pragma once

#include <vector>

#include "camp/sim.hpp"

namespace camp {

enum class ManeuverCategory {
  no_traffic,
  merge_before,
  merge_behind,
  gap_class1,
  gap_class2,
  stop_then_merge,
};

const char* to_string(ManeuverCategory category);

struct JerkStats {
  double max_abs = 0.0;  // of the smoothed series
  double rms = 0.0;
  std::vector<double> smoothed;
};

// Central-difference jerk from an acceleration series, smoothed with a
// centered moving average of the given window.
JerkStats jerk_stats(const std::vector<double>& accel, double dt, double window = 0.3);

// Smallest distance from any vehicle corner to the lane boundary it faces.
// Negative means a corner is outside the lane.
double lane_clearance(const BoundingBox& box, const ReferencePath& left_boundary,
                      const ReferencePath& right_boundary);

struct ManeuverRecord {
  ManeuverCategory category = ManeuverCategory::no_traffic;
  bool reached = false;
  double t_goal = -1.0;
  double min_clearance = 0.0;
  int frames_outside_lane = 0;
  double max_abs_jerk = 0.0;
  double rms_jerk = 0.0;
  double standstill_time = 0.0;
  double min_approach_v = 0.0;  // slowest speed before the stop line
};

ManeuverCategory categorize_maneuver(const Scenario& scenario, const SimLog& log);

ManeuverRecord evaluate_run(const Scenario& scenario, const SimLog& log);

}  // namespace camp
