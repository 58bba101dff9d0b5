#include "camp/sim.hpp"

#include <chrono>
#include <cmath>

namespace camp {

namespace {

// Fail-safe bookkeeping for the cycle log: end position and whether the
// braking tail is exactly the full-deceleration parabola.
void record_fail_safe(const std::vector<BehaviorOption>& options,
                      const LongitudinalState& lon, double a_min, CycleRecord& rec) {
  const BehaviorOption* fs = nullptr;
  for (const auto& opt : options) {
    if (opt.kind == BehaviorKind::fail_safe) {
      fs = &opt;
      break;
    }
  }
  if (!fs || fs->targets.empty()) return;
  rec.fail_safe_present = true;
  rec.fail_safe_end_s = fs->targets.back().s;
  const double b = std::abs(a_min);
  if (fs->targets.size() == 2 && std::abs(fs->targets[0].a - a_min) < 1e-9) {
    double dv = fs->targets[0].v;
    double ds = fs->targets[1].s - fs->targets[0].s;
    double dt = fs->targets[1].t - fs->targets[0].t;
    rec.fail_safe_kinematic_ok =
        std::abs(ds - dv * dv / (2.0 * b)) < 1e-9 && std::abs(dt - dv / b) < 1e-9;
  } else {
    // single comfort profile: ends stopped, no parabola tail to verify
    rec.fail_safe_kinematic_ok = fs->targets.back().v == 0.0;
  }
  (void)lon;
}

int context_index_at(const std::vector<SituationContext>& contexts, double s) {
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    bool last = i + 1 == contexts.size();
    if (s >= contexts[i].s_begin - 1e-9 &&
        (s < contexts[i].s_end || (last && s <= contexts[i].s_end + 1e-6))) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

SimLog run_scenario(const Scenario& sc, unsigned seed) {
  World world(sc, seed);
  auto contexts = precompute_contexts(sc.ego_path, sc.rules, sc.constraints);
  Tracker tracker(sc.ego_path, sc.vehicle, sc.tracker);

  VehicleState ego;
  {
    Vec2 p = sc.ego_path.position_at(sc.ego_start.s);
    ego.x = p.x;
    ego.y = p.y;
    ego.heading = sc.ego_path.heading_at(sc.ego_start.s);
    ego.v = sc.ego_start.v;
    ego.a = sc.ego_start.a;
    double kappa = sc.ego_path.curvature_at(sc.ego_start.s);
    double g = 1.0 + (ego.v / sc.vehicle.v_char) * (ego.v / sc.vehicle.v_char);
    ego.steer = kappa * sc.vehicle.wheelbase * g;
  }

  SimLog log;
  log.scenario = sc.name;
  log.seed = seed;
  double p_rel = perception_reliability(sc.reliability);

  double goal_s = sc.rules.junctions.empty() ? sc.ego_path.total_length - sc.goal_margin
                                             : sc.rules.junctions.front().s_pga;

  std::optional<BehaviorOption> prev_opt;
  double prev_epoch = 0.0;
  LongitudinalTrajectory current_plan;
  double plan_epoch = 0.0;
  bool have_plan = false;

  const int steps = static_cast<int>(std::llround(sc.duration / sc.sim_dt));
  const int plan_every =
      std::max(1, static_cast<int>(std::llround(sc.plan_period / sc.sim_dt)));

  for (int k = 0; k <= steps; ++k) {
    double now = k * sc.sim_dt;
    auto frenet = project_to_frenet(sc.ego_path, {ego.x, ego.y});

    SimFrame frame;
    frame.t = now;
    frame.ego = ego;
    frame.ego_s = frenet.s;
    frame.ego_d = frenet.d;
    frame.a_perp = lateral_acceleration(ego, sc.vehicle);
    for (const auto& actor : world.actors()) {
      frame.actors.push_back({actor.id, actor.lane, actor.s, actor.v, actor.active});
    }
    log.frames.push_back(std::move(frame));
    log.t_end = now;

    if (log.t_goal < 0.0 && frenet.s >= goal_s) log.t_goal = now;
    if (frenet.s >= sc.ego_path.total_length - sc.goal_margin) {
      log.reached_goal = true;
      break;
    }
    if (k == steps) break;

    if (k % plan_every == 0) {
      LongitudinalState lon{frenet.s, ego.v, ego.a};
      int raw_idx = context_index_at(contexts, frenet.s);
      if (raw_idx < 0) throw NoContext("ego left the planned route");
      auto t0 = std::chrono::steady_clock::now();

      auto objects = world.sensed_objects(
          {ego.x, ego.y}, now, contexts[static_cast<std::size_t>(raw_idx)].assumptions.relevant_lanes);
      SituationContext ctx = select_and_update_context(
          contexts, lon, objects, now, prev_opt ? &*prev_opt : nullptr, prev_epoch);
      ctx.behaviors = generate_behavior_options(ctx, lon, objects, sc.sampler, now);
      PlanResult res = plan(ctx, lon, objects, p_rel, sc.planner, sc.risk);

      auto t1 = std::chrono::steady_clock::now();

      current_plan = res.trajectory;
      plan_epoch = now;
      have_plan = true;
      prev_opt = res.option;
      prev_epoch = now;

      CycleRecord rec;
      rec.t = now;
      rec.ego_s = lon.s;
      rec.ego_v = lon.v;
      rec.ego_a = lon.a;
      rec.context_index = raw_idx;
      rec.n_options = static_cast<int>(ctx.behaviors.size());
      rec.evaluated = res.evaluated;
      rec.winner_label = res.option.label;
      rec.winner_kind = res.option.kind;
      rec.winner_importance = res.option.importance;
      rec.best_cost = res.best_cost;
      rec.p_risk = res.p_risk;
      rec.p_rel = p_rel;
      rec.t_pnr = res.trajectory.t_pnr.value_or(0.0);
      rec.t_pga = res.trajectory.t_pga.value_or(0.0);
      rec.plan_max_jerk = res.trajectory.max_abs_jerk();
      LongitudinalState fin = res.trajectory.state_at(res.trajectory.duration());
      rec.winner_end_s = fin.s;
      rec.winner_end_v = fin.v;
      if (ctx.junction) {
        double b = std::abs(ctx.constraints.a_min);
        double s_stop = ctx.junction->rule.s_stop;
        rec.committed = lon.v * lon.v > 2.0 * b * (s_stop - lon.s) + 1e-9;
        double t_stoppable = res.trajectory.t_pnr.value_or(res.trajectory.duration());
        for (double t = 0.0; t <= t_stoppable + 1e-12; t += sc.planner.scan_step) {
          LongitudinalState st = res.trajectory.state_at(std::min(t, t_stoppable));
          if (st.v * st.v > 2.0 * b * (s_stop - st.s) + 1e-9) {
            rec.winner_envelope_ok = false;
            break;
          }
        }
        record_fail_safe(ctx.behaviors, lon, ctx.constraints.a_min, rec);
        rec.eos_active = make_virtual_eos_object(sc.risk, objects).has_value();
      }
      for (const auto& obj : objects) {
        rec.objects.push_back({obj.id, obj.lane, obj.s0, obj.v, obj.source});
      }
      rec.plan_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      log.cycles.push_back(std::move(rec));
    }

    if (have_plan) {
      auto sol = tracker.solve(ego, current_plan, now - plan_epoch);
      ego = bicycle_step(ego, sc.vehicle, sol.controls[0][0], sol.controls[0][1], sc.sim_dt);
    }
    world.step(sc.sim_dt);
  }
  return log;
}

}  // namespace camp
