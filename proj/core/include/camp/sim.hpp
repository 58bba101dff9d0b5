#pragma once

#include <optional>
#include <string>
#include <vector>

#include "camp/world.hpp"

namespace camp {

struct ObjectFrame {
  std::string id;
  std::string lane;
  double s = 0.0;
  double v = 0.0;
  ObjectSource source = ObjectSource::ego;
};

// One planning cycle: inputs, chosen behavior, and the per-cycle escape data.
struct CycleRecord {
  double t = 0.0;
  double ego_s = 0.0;
  double ego_v = 0.0;
  double ego_a = 0.0;
  int context_index = -1;
  int n_options = 0;
  int evaluated = 0;
  std::string winner_label;
  BehaviorKind winner_kind = BehaviorKind::fail_safe;
  int winner_importance = 0;
  double best_cost = 0.0;
  double p_risk = 0.0;
  double p_rel = 0.0;
  double t_pnr = 0.0;
  double t_pga = 0.0;
  double plan_max_jerk = 0.0;         // closed-form extremum over the winner
  double winner_end_s = 0.0;
  double winner_end_v = 0.0;
  // Kinematic escape along the winner: v^2 <= 2|a_min|(s_stop - s) holds at
  // every scanned point before commitment (vacuously true without a junction).
  bool winner_envelope_ok = true;
  bool committed = false;             // past the last stoppable point
  bool fail_safe_present = false;
  double fail_safe_end_s = 0.0;
  bool fail_safe_kinematic_ok = false;
  bool eos_active = false;
  std::vector<ObjectFrame> objects;
  double plan_ms = 0.0;  // wall time; kept out of the deterministic log
};

struct ActorFrame {
  std::string id;
  std::string lane;
  double s = 0.0;
  double v = 0.0;
  bool active = false;
};

struct SimFrame {
  double t = 0.0;
  VehicleState ego;
  double ego_s = 0.0;
  double ego_d = 0.0;
  double a_perp = 0.0;
  std::vector<ActorFrame> actors;
};

struct SimLog {
  std::string scenario;
  unsigned seed = 0;
  bool reached_goal = false;
  double t_goal = -1.0;  // first crossing of the merge end (or route end)
  double t_end = 0.0;
  std::vector<SimFrame> frames;
  std::vector<CycleRecord> cycles;
};

// Closed-loop run: plan at plan_period, track and integrate at sim_dt,
// advance scripted traffic, log every frame and cycle.
SimLog run_scenario(const Scenario& scenario, unsigned seed);

}  // namespace camp
