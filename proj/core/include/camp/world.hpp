#pragma once

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "camp/context.hpp"
#include "camp/geometry.hpp"
#include "camp/planner.hpp"
#include "camp/risk.hpp"
#include "camp/tracking.hpp"

namespace camp {

enum class ActorBehavior { constant_speed, idm_follow, turn_off_at };

struct ActorSpec {
  std::string id;
  std::string lane;
  double s0 = 0.0;
  double v0 = 0.0;
  double spawn_time = 0.0;
  ActorBehavior behavior = ActorBehavior::constant_speed;
  double turn_off_s = 0.0;
  double length = 4.6;
  double width = 1.8;
  // intelligent-driver follow parameters
  double idm_v0 = 8.33;
  double idm_T = 1.5;
  double idm_a = 1.5;
  double idm_b = 2.0;
  double idm_s0 = 2.0;
};

struct ActorState {
  std::string id;
  std::string lane;
  double s = 0.0;
  double v = 0.0;
  bool active = false;
  Vec2 position;
  double heading = 0.0;
};

struct SensorJitter {
  double pos_sd = 0.0;
  double vel_sd = 0.0;
};

struct SensorSetup {
  std::vector<std::vector<Vec2>> ego_fov;   // empty: range-limited only
  std::vector<std::vector<Vec2>> ext_fov;   // empty: no infrastructure sensing
  std::vector<std::vector<Vec2>> occluders; // block the onboard line of sight
  double ego_range = 80.0;
  double ext_latency = 0.015;
  SensorJitter ego_jitter;
  SensorJitter ext_jitter;
};

struct DetectedObject {
  std::string id;
  std::string lane;
  double s = 0.0;        // lane frame
  double v = 0.0;
  ObjectSource source = ObjectSource::ego;
  double t_stamp = 0.0;  // measurement time
};

struct MergeDebug {
  int onboard = 0;
  int infrastructure = 0;
  int fused = 0;
  int dropped_irrelevant = 0;
  int violators_kept = 0;
  std::vector<std::string> discrepant_ids;
};

struct Scenario {
  std::string name;
  ReferencePath ego_path;
  std::map<std::string, ReferencePath> lane_paths;
  std::map<std::string, double> lane_offsets;  // s_ego = s_lane - offset
  MapRules rules;
  ConstraintSet constraints;
  RiskConfig risk;
  ReliabilityEstimate reliability;
  SamplerConfig sampler;
  PlannerConfig planner;
  TrackerConfig tracker;
  VehicleParams vehicle;
  SensorSetup sensors;
  std::vector<ActorSpec> actors;
  LongitudinalState ego_start{0.0, 8.33, 0.0};
  double lane_width = 3.5;
  double duration = 40.0;
  double plan_period = 0.1;
  double sim_dt = 0.05;
  double goal_margin = 2.0;
};

// Merges onboard and infrastructure detections into ego-frame predictions.
// Same-id pairs agreeing within gate_m are fused; disagreeing pairs keep the
// onboard measurement. Objects on irrelevant lanes are dropped unless they
// violate traffic rules (speeding past 1.3x the limit, or driving against
// the lane direction).
std::vector<ObjectPrediction> merge_object_lists(
    const std::vector<DetectedObject>& onboard,
    const std::vector<DetectedObject>& infrastructure, double now,
    const std::vector<std::string>& relevant_lanes, double v_sl,
    const std::map<std::string, double>& lane_offsets, const RiskConfig& risk,
    double gate_m = 2.0, MergeDebug* debug = nullptr);

class World {
 public:
  World(const Scenario& scenario, unsigned seed);

  void step(double dt);
  double time() const { return time_; }
  const std::vector<ActorState>& actors() const { return states_; }

  std::vector<DetectedObject> sense_onboard(const Vec2& ego_position, double now);
  std::vector<DetectedObject> sense_infrastructure(double now);

  std::vector<ObjectPrediction> sensed_objects(const Vec2& ego_position, double now,
                                               const std::vector<std::string>& relevant_lanes,
                                               MergeDebug* debug = nullptr);

 private:
  struct History {
    std::deque<std::array<double, 3>> samples;  // t, s, v
  };

  void refresh_state(std::size_t i);

  const Scenario& sc_;
  std::vector<ActorState> states_;
  std::vector<History> histories_;
  std::vector<double> accel_;
  std::vector<bool> done_;  // left the road; never reactivated
  double time_ = 0.0;
  std::mt19937 rng_;
};

}  // namespace camp
