#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "camp/context.hpp"
#include "camp/json_io.hpp"
#include "camp/planner.hpp"
#include "camp/risk.hpp"
#include "camp/tracking.hpp"

namespace {

const std::string kScenarioDir = CAMP_SCENARIO_DIR;

void BM_QuinticSolve(benchmark::State& state) {
  camp::LongitudinalState x0{0.0, 8.33, 0.0};
  camp::LongitudinalState xf{75.0, 4.3, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(camp::solve_min_jerk_segment(x0, xf, 10.0));
  }
}
BENCHMARK(BM_QuinticSolve);

void BM_RiskAggregate(benchmark::State& state) {
  camp::LongitudinalTrajectory traj;
  traj.segments.push_back(camp::solve_min_jerk_segment({30.0, 8.33, 0.0}, {66.0, 4.0, 0.0}, 6.0));
  traj.segments.push_back(camp::solve_min_jerk_segment({66.0, 4.0, 0.0}, {96.0, 6.0, 0.0}, 6.0));
  traj.t_pnr = 5.0;
  traj.t_pga = 12.0;

  std::vector<camp::ObjectPrediction> objects;
  for (int i = 0; i < state.range(0); ++i) {
    camp::ObjectPrediction obj;
    obj.id = "o" + std::to_string(i);
    obj.lane = "main";
    obj.s0 = -20.0 + 14.0 * i;
    obj.v = 8.33;
    objects.push_back(obj);
  }
  camp::RiskConfig cfg;
  cfg.eos_enabled = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(camp::aggregate_risk(traj, objects, cfg, 0.98046875));
  }
}
BENCHMARK(BM_RiskAggregate)->Arg(2)->Arg(8)->Arg(16);

// One full planning cycle (option sampling + candidate evaluation) mid
// approach with a busy main road, matching the dense stress scenario.
void BM_PlanCycle(benchmark::State& state) {
  camp::Scenario sc = camp::load_scenario(kScenarioDir + "/dense.json");
  auto contexts = camp::precompute_contexts(sc.ego_path, sc.rules, sc.constraints);
  double offset = sc.lane_offsets.at("main");

  double now = 6.0;
  camp::LongitudinalState ego{44.0, 7.0, -0.5};
  std::vector<camp::ObjectPrediction> objects;
  for (const auto& actor : sc.actors) {
    if (actor.spawn_time > now) continue;
    camp::ObjectPrediction obj;
    obj.id = actor.id;
    obj.lane = actor.lane;
    obj.s0 = actor.s0 + actor.v0 * (now - actor.spawn_time) - offset;
    obj.v = actor.v0;
    obj.source = camp::ObjectSource::external;
    objects.push_back(obj);
  }

  double p_rel = camp::perception_reliability(sc.reliability);
  for (auto _ : state) {
    camp::SituationContext ctx =
        camp::select_and_update_context(contexts, ego, objects, now);
    ctx.behaviors = camp::generate_behavior_options(ctx, ego, objects, sc.sampler, now);
    auto result = camp::plan(ctx, ego, objects, p_rel, sc.planner, sc.risk);
    benchmark::DoNotOptimize(result);
    state.counters["options"] = static_cast<double>(ctx.behaviors.size());
  }
}
BENCHMARK(BM_PlanCycle)->Unit(benchmark::kMillisecond);

void BM_TrackerSolve(benchmark::State& state) {
  camp::Scenario sc = camp::load_scenario(kScenarioDir + "/junction_base.json");
  camp::Tracker tracker(sc.ego_path, sc.vehicle, sc.tracker);

  camp::LongitudinalTrajectory plan;
  plan.segments.push_back(camp::solve_min_jerk_segment({30.0, 8.33, 0.0}, {66.0, 4.3, 0.0}, 6.0));
  plan.segments.push_back(camp::solve_min_jerk_segment({66.0, 4.3, 0.0}, {96.0, 6.0, 0.0}, 6.0));

  camp::VehicleState x0;
  camp::Vec2 pos = sc.ego_path.position_at(30.0);
  x0.x = pos.x;
  x0.y = pos.y;
  x0.heading = sc.ego_path.heading_at(30.0);
  x0.v = 8.2;
  x0.a = -0.1;

  for (auto _ : state) {
    tracker.reset();
    benchmark::DoNotOptimize(tracker.solve(x0, plan, 0.0));
  }
}
BENCHMARK(BM_TrackerSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
