#include "camp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace camp {

LongitudinalTrajectory assemble_candidate(const LongitudinalState& x0,
                                          const BehaviorOption& option) {
  LongitudinalTrajectory traj;
  LongitudinalState cur = x0;
  double t_prev = 0.0;
  for (const auto& tgt : option.targets) {
    double dt = tgt.t - t_prev;
    LongitudinalState xf{tgt.s, tgt.v, tgt.a};
    traj.segments.push_back(solve_min_jerk_segment(cur, xf, dt));
    cur = xf;
    t_prev = tgt.t;
  }
  return traj;
}

void annotate_passageway(LongitudinalTrajectory& traj, const BehaviorOption& option,
                         double s_stop, double a_min, double scan_step) {
  double duration = traj.duration();
  bool passes = false;
  double t_pga = duration;
  for (const auto& tgt : option.targets) {
    if (tgt.role == TargetRole::pga) {
      passes = true;
      t_pga = tgt.t;
    }
  }
  if (!passes) {
    traj.t_pnr = duration;
    traj.t_pga = duration;
    return;
  }

  // Commitment is the last scanned state that can still brake to the line,
  // i.e. the probe just before the braking envelope is first exceeded.
  double t_pnr = t_pga;
  double t_last_ok = 0.0;
  const double b = std::abs(a_min);
  for (double t = 0.0; t <= t_pga + 1e-9; t += scan_step) {
    double tc = std::min(t, t_pga);
    auto x = traj.state_at(tc);
    if (x.s + x.v * x.v / (2.0 * b) > s_stop + 1e-9) {
      t_pnr = t_last_ok;
      break;
    }
    t_last_ok = tc;
  }
  traj.t_pnr = t_pnr;
  traj.t_pga = t_pga;
}

bool check_constraints(const LongitudinalTrajectory& traj, const ConstraintSet& cs,
                       double scan_step, std::string* why) {
  // Sampled targets sit exactly on the profile bounds, so the checks carry
  // small physical tolerances rather than pure float slack: grid-snapped
  // candidates may ripple a few centimetres per second around the bound, and
  // settle stops from a nonzero start acceleration cross zero speed softly.
  const double a_tol = 5e-3;
  const double v_rev_tol = 0.02;
  const double v_tol = 0.05;
  double duration = traj.duration();
  std::vector<double> probes;
  for (double t = 0.0; t < duration; t += scan_step) probes.push_back(t);
  double edge = 0.0;
  for (const auto& seg : traj.segments) {
    edge += seg.duration;
    probes.push_back(std::min(edge, duration));
  }

  // The start state is measured, not chosen: tracking overshoot can hand the
  // planner a state already past a bound. Such inherited excess is forgiven
  // on a short decaying window instead of voiding every candidate.
  const double t_grace = 0.5;
  auto x_start = traj.state_at(0.0);
  double v_excess0 = std::max(0.0, x_start.v - cs.v_max_at(x_start.s, 0.0));
  double a_excess0 =
      std::max({0.0, x_start.a - cs.a_max, cs.a_min - x_start.a});

  for (double t : probes) {
    auto x = traj.state_at(t);
    double fade = std::max(0.0, 1.1 - t / t_grace);
    double a_allow = a_tol + a_excess0 * fade;
    if (x.a < cs.a_min - a_allow || x.a > cs.a_max + a_allow) {
      if (why) *why = "acceleration";
      return false;
    }
    if (x.v < -v_rev_tol) {
      if (why) *why = "reverse";
      return false;
    }
    if (x.v > cs.v_max_at(x.s, t) + v_tol + v_excess0 * fade) {
      if (why) *why = "speed";
      return false;
    }
  }
  return true;
}

bool check_commit_envelope(const LongitudinalTrajectory& traj, double s_stop,
                           double a_min, double scan_step) {
  const double b = std::abs(a_min);
  double t_end = traj.t_pnr.value_or(traj.duration());
  for (double t = 0.0; t <= t_end + 1e-9; t += scan_step) {
    auto x = traj.state_at(std::min(t, t_end));
    if (x.v * x.v > 2.0 * b * (s_stop - x.s) + 1e-6) return false;
  }
  return true;
}

double trajectory_cost(const LongitudinalTrajectory& traj, double w_tf, double p_risk) {
  double cost = p_risk;
  for (const auto& seg : traj.segments) {
    cost += seg.jerk_cost() + w_tf * seg.duration * seg.duration;
  }
  return cost;
}

PlanResult plan(const SituationContext& ctx, const LongitudinalState& x0,
                const std::vector<ObjectPrediction>& objects, double p_rel,
                const PlannerConfig& pcfg, const RiskConfig& rcfg) {
  std::vector<ObjectPrediction> pool = objects;
  if (ctx.junction) {
    if (auto eos = make_virtual_eos_object(rcfg, objects)) pool.push_back(*eos);
  }

  PlanResult result;
  result.best_cost = std::numeric_limits<double>::infinity();
  bool have_best = false;
  double best_bid = std::numeric_limits<double>::infinity();
  double best_t_final = std::numeric_limits<double>::infinity();
  int prev_importance = std::numeric_limits<int>::max();

  for (const auto& opt : ctx.behaviors) {
    if (pcfg.early_exit && have_best && opt.importance < prev_importance &&
        prev_importance != std::numeric_limits<int>::max()) {
      break;
    }
    prev_importance = opt.importance;

    CandidateRecord rec;
    rec.label = opt.label;
    rec.kind = opt.kind;
    rec.importance = opt.importance;
    rec.t_final = opt.targets.empty() ? 0.0 : opt.targets.back().t;
    ++result.evaluated;

    LongitudinalTrajectory traj;
    try {
      traj = assemble_candidate(x0, opt);
    } catch (const NonpositiveDuration&) {
      rec.reject_reason = "assembly";
      result.candidates.push_back(std::move(rec));
      continue;
    }

    double s_stop = ctx.junction ? ctx.junction->rule.s_stop
                                 : std::numeric_limits<double>::infinity();
    annotate_passageway(traj, opt, s_stop, ctx.constraints.a_min, pcfg.scan_step);

    std::string why;
    if (!check_constraints(traj, ctx.constraints, pcfg.scan_step, &why)) {
      rec.reject_reason = "constraints:" + why;
      result.candidates.push_back(std::move(rec));
      continue;
    }

    // The stop-at-line escape must stay reachable until commitment. Skipped
    // once the start state itself is past the envelope (braking to the line
    // is no longer on the table, so the requirement is vacuous) and for the
    // fail-safe options themselves: the sampled ramp variant may end a hair
    // past the ideal constant-braking point, and rejecting the escape of
    // last resort would trade "brake as hard as possible" for infeasibility.
    if (ctx.junction && opt.kind != BehaviorKind::fail_safe) {
      bool committed_now =
          x0.v * x0.v > 2.0 * std::abs(ctx.constraints.a_min) * (s_stop - x0.s) + 1e-9;
      if (!committed_now &&
          !check_commit_envelope(traj, s_stop, ctx.constraints.a_min, pcfg.scan_step)) {
        rec.reject_reason = "envelope";
        result.candidates.push_back(std::move(rec));
        continue;
      }
    }

    double p_risk = aggregate_risk(traj, pool, rcfg, p_rel);
    rec.p_risk = p_risk;
    if (p_risk > ctx.constraints.p_risk_max) {
      rec.reject_reason = "risk";
      result.candidates.push_back(std::move(rec));
      continue;
    }

    rec.valid = true;
    rec.cost = trajectory_cost(traj, pcfg.w_tf, p_risk);
    // Switching plans costs a tracking transient the cost term cannot see;
    // the carried-over plan bids at a discount so a challenger has to beat
    // it by a clear margin, not by noise.
    double bid = opt.seeded ? rec.cost * pcfg.seed_bias : rec.cost;
    bool better = bid < best_bid - pcfg.cost_tie_eps;
    bool tie_earlier = std::abs(bid - best_bid) <= pcfg.cost_tie_eps &&
                       rec.t_final < best_t_final;
    if (!have_best || better || tie_earlier) {
      have_best = true;
      best_bid = bid;
      result.best_cost = rec.cost;
      best_t_final = rec.t_final;
      result.trajectory = traj;
      result.option = opt;
      result.p_risk = p_risk;
    }
    result.candidates.push_back(std::move(rec));
  }

  if (!have_best) {
    throw Infeasible("no valid trajectory among " +
                     std::to_string(result.candidates.size()) + " candidates");
  }
  return result;
}

}  // namespace camp
