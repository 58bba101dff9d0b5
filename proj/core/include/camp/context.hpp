#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "camp/geometry.hpp"
#include "camp/risk.hpp"
#include "camp/trajectory.hpp"

namespace camp {

class NoContext : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InconsistentRules : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Piecewise-linear speed profile sampled over arc length.
struct SpeedProfile {
  std::vector<double> s;
  std::vector<double> v;
  double at(double query) const;
};

// Piecewise-constant profile; value i applies on [s_break[i], s_break[i+1]).
struct StepProfile {
  std::vector<double> s_break;
  std::vector<double> v;
  double at(double query) const;
};

// Moving speed bound imposed by a lead vehicle: behind the lead's predicted
// position (minus the front safety distance) the static profile applies, at
// or beyond it the lead's predicted speed applies.
struct LeadRestriction {
  ObjectPrediction lead;
  double s_plus0 = 2.0;
  double headway = 1.0;

  double boundary_at(double t) const {
    return lead.mean_at(t) - (s_plus0 + headway * lead.speed_at(t));
  }
};

struct ConstraintSet {
  double a_min = -4.0;
  double a_max = 2.0;
  double a_perp_max = 1.45;
  double T_pred = 10.0;
  double p_risk_max = 0.05;
  StepProfile v_static;
  SpeedProfile v_raw;
  std::optional<LeadRestriction> lead;

  double v_max_at(double s, double t) const;
};

struct RegularizingAssumptions {
  bool curve_constant_speed = true;
  bool rational_drivers = true;
  std::vector<std::string> relevant_lanes{"ego", "main"};
};

enum class TargetRole { plain, pnr, curve_exit, pga };

struct TargetState {
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  double t = 0.0;  // final time relative to plan start, strictly increasing
  TargetRole role = TargetRole::plain;
};

enum class BehaviorKind {
  merge_dynamic,
  follow_then_merge,
  follow_then_stop,
  gentle_stop,
  fail_safe,
};

const char* to_string(BehaviorKind kind);

struct BehaviorOption {
  BehaviorKind kind = BehaviorKind::fail_safe;
  int importance = 0;
  std::vector<TargetState> targets;
  std::string label;
  bool seeded = false;  // carried over from the previous cycle's winner
};

// Yield junction along the ego path, in the planning (ego path) coordinate.
struct YieldJunction {
  double s_stop = 0.0;
  double s_pga = 0.0;
  double conflict_lo = 0.0;   // shared-corridor window on the ego path
  double conflict_hi = 0.0;
  double main_offset = 0.0;   // s_main = s_ego + main_offset
};

struct MapRules {
  double v_sl = 8.33;
  std::vector<YieldJunction> junctions;
};

// Junction data enriched with profile-derived quantities at precompute time.
struct JunctionInfo {
  YieldJunction rule;
  double curve_entry_s = 0.0;  // start of the last curve segment before s_pga
  double curve_exit_s = 0.0;   // end of that segment
  double curve_speed = 0.0;    // constant profile value on that segment
  double v_pga = 0.0;          // target speed when reaching s_pga
  double leg_pga = 0.0;        // nominal travel time conflict_lo -> s_pga
  bool has_curve = false;
};

struct SituationContext {
  double s_begin = 0.0;
  double s_end = 0.0;
  ConstraintSet constraints;
  RegularizingAssumptions assumptions;
  std::optional<JunctionInfo> junction;
  std::optional<BehaviorOption> seeded;
  std::vector<BehaviorOption> behaviors;
};

struct SamplerConfig {
  double v_min = 1.0;
  double v_step = 0.5;
  double time_step = 0.5;      // absolute-time grid resolution
  int times_per_gap = 3;
  double gap_margin = 0.5;     // offset inside gap edges, s
  double min_gap = 1.5;        // smallest usable gap, s
  int stop_time_samples = 3;
  int cruise_time_samples = 3;
  int follow_t1_samples = 3;
  int follow_t2_samples = 3;
  int max_options = 400;
};

// Pointwise speed bound from the legal limit and the lateral acceleration
// budget through curvature.
SpeedProfile speed_limit_profile(const ReferencePath& path, const SpeedProfile& v_sl,
                                 double a_perp_max);
SpeedProfile speed_limit_profile(const ReferencePath& path, double v_sl,
                                 double a_perp_max);

// Collapses the pointwise profile to one constant per curve/straight segment
// (the minimum over the segment, i.e. the value at the tightest radius).
// Segment boundaries fall where |curvature| crosses the threshold or flips
// sign.
StepProfile segmentwise_constant(const SpeedProfile& profile, const ReferencePath& path,
                                 double kappa_threshold = 0.0025);

// Last position from which braking at a_min still stops at s_stop.
double compute_pnr(double v, double a_min, double s_stop);

// Splits the route into situation contexts. A junction context begins at the
// first position from which s_pga is reachable within T_pred at profile
// speed, and ends at s_pga.
std::vector<SituationContext> precompute_contexts(const ReferencePath& path,
                                                  const MapRules& rules,
                                                  const ConstraintSet& base);

// Context lookup plus per-cycle refresh: attaches the lead restriction when a
// lead exists, and re-anchors the previous winner (dropping passed targets,
// shifting final times) as a seeded candidate. prev_epoch is the world time
// at which prev's relative target times were issued.
SituationContext select_and_update_context(const std::vector<SituationContext>& contexts,
                                           const LongitudinalState& ego,
                                           const std::vector<ObjectPrediction>& objects,
                                           double now,
                                           const BehaviorOption* prev = nullptr,
                                           double prev_epoch = 0.0);

// Behavior option sampling for the current cycle. All time grids are anchored
// to absolute world time (multiples of time_step, or gap-edge events), which
// makes replanning from a state on the previous trajectory reproduce it.
std::vector<BehaviorOption> generate_behavior_options(
    const SituationContext& ctx, const LongitudinalState& ego,
    const std::vector<ObjectPrediction>& objects, const SamplerConfig& sampler,
    double now);

}  // namespace camp
