#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "camp/context.hpp"
#include "camp/risk.hpp"
#include "camp/trajectory.hpp"

namespace camp {

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlannerConfig {
  double w_tf = 0.05;          // squared-duration weight per segment
  double scan_step = 0.05;     // constraint scan resolution
  bool early_exit = true;      // stop after an importance class with a winner
  double cost_tie_eps = 1e-9;  // ties resolved toward the earlier finish
  double seed_bias = 0.85;     // carried-over plan bids at a discount
};

struct CandidateRecord {
  std::string label;
  BehaviorKind kind = BehaviorKind::fail_safe;
  int importance = 0;
  double t_final = 0.0;
  double cost = 0.0;
  double p_risk = 0.0;
  bool valid = false;
  std::string reject_reason;  // empty, "assembly", "constraints", "envelope", "risk"
};

struct PlanResult {
  LongitudinalTrajectory trajectory;
  BehaviorOption option;
  std::vector<CandidateRecord> candidates;
  int evaluated = 0;
  double best_cost = 0.0;
  double p_risk = 0.0;
};

// Fits one minimum-jerk segment per target, in order, starting from x0.
// Throws NonpositiveDuration when target times do not strictly increase.
LongitudinalTrajectory assemble_candidate(const LongitudinalState& x0,
                                          const BehaviorOption& option);

// Stamps commitment and merge-end times onto the trajectory. Commitment is
// the first instant the state can no longer brake to a stop at s_stop with
// a_min; trajectories that never pass the merge end carry an empty window.
void annotate_passageway(LongitudinalTrajectory& traj, const BehaviorOption& option,
                         double s_stop, double a_min, double scan_step);

// Dense scan of acceleration bounds and the (possibly lead-restricted)
// speed bound. Returns false with a reason on the first violation.
bool check_constraints(const LongitudinalTrajectory& traj, const ConstraintSet& cs,
                       double scan_step, std::string* why = nullptr);

// Requires the stop-at-line escape to remain available until commitment:
// v(t)^2 <= 2|a_min| (s_stop - s(t)) for t in [0, t_pnr].
bool check_commit_envelope(const LongitudinalTrajectory& traj, double s_stop,
                           double a_min, double scan_step);

double trajectory_cost(const LongitudinalTrajectory& traj, double w_tf, double p_risk);

// Evaluates the context's behavior options from highest importance down and
// returns the cheapest valid candidate. Options are materialized against the
// relevant object list plus, when enabled, the virtual end-of-sight object.
// Throws Infeasible when no candidate survives.
PlanResult plan(const SituationContext& ctx, const LongitudinalState& x0,
                const std::vector<ObjectPrediction>& objects, double p_rel,
                const PlannerConfig& pcfg, const RiskConfig& rcfg);

}  // namespace camp
