#include "camp/batch.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace camp {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<BatchRun> run_batch(const Scenario& sc, int reps, unsigned seed0) {
  if (reps <= 0) throw EmptyBatch("batch with zero runs");
  std::vector<BatchRun> runs(static_cast<std::size_t>(reps));

  int threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CAMP_THREADS")) {
    threads = std::max(1, std::atoi(env));
  }
  threads = std::min<int>(threads, reps);

  auto work = [&](int begin, int stride) {
    for (int i = begin; i < reps; i += stride) {
      unsigned seed = seed0 + static_cast<unsigned>(i);
      BatchRun run;
      run.seed = seed;
      run.log = run_scenario(sc, seed);
      run.record = evaluate_run(sc, run.log);
      runs[static_cast<std::size_t>(i)] = std::move(run);
    }
  };

  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  return runs;
}

void write_batch(const Scenario& sc, const std::vector<BatchRun>& runs,
                 const std::string& out_dir) {
  if (runs.empty()) throw EmptyBatch("nothing to write");
  fs::create_directories(out_dir);

  std::string summary =
      "scenario,seed,category,reached,t_goal,min_clearance,frames_outside,"
      "max_jerk,rms_jerk,standstill,min_approach_v\n";
  char buf[256];
  for (const auto& run : runs) {
    std::string stem = sc.name + "_" + std::to_string(run.seed);
    write_log_json(run.log, (fs::path(out_dir) / (stem + ".json")).string());
    write_frames_csv(run.log, (fs::path(out_dir) / (stem + "_frames.csv")).string());
    write_cycles_csv(run.log, (fs::path(out_dir) / (stem + "_cycles.csv")).string());
    write_timings_json(run.log, (fs::path(out_dir) / (stem + "_timings.json")).string());
    std::snprintf(buf, sizeof(buf), "%s,%u,%s,%d,%.6f,%.6f,%d,%.6f,%.6f,%.3f,%.6f\n",
                  sc.name.c_str(), run.seed, to_string(run.record.category),
                  run.record.reached ? 1 : 0, run.record.t_goal, run.record.min_clearance,
                  run.record.frames_outside_lane, run.record.max_abs_jerk,
                  run.record.rms_jerk, run.record.standstill_time,
                  run.record.min_approach_v);
    summary += buf;
  }
  std::ofstream out(fs::path(out_dir) / "summary.csv", std::ios::binary);
  out << summary;
}

std::vector<CategorySummary> summarize_directory(const std::string& dir) {
  struct Row {
    std::string category;
    double t_goal, clearance, jerk, standstill;
  };
  std::vector<Row> rows;
  if (!fs::exists(dir)) throw EmptyBatch("no such directory: " + dir);
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() != "summary.csv") continue;
    std::ifstream in(entry.path());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      if (fields.size() < 11) continue;
      rows.push_back({fields[2], std::stod(fields[4]), std::stod(fields[5]),
                      std::stod(fields[7]), std::stod(fields[9])});
    }
  }
  if (rows.empty()) throw EmptyBatch("no summary rows under " + dir);

  std::map<std::string, std::vector<Row>> grouped;
  for (const auto& row : rows) grouped[row.category].push_back(row);

  std::vector<CategorySummary> out;
  for (const auto& [category, group] : grouped) {
    CategorySummary cs;
    cs.category = category;
    cs.count = static_cast<int>(group.size());
    cs.t_goal_min = std::numeric_limits<double>::infinity();
    cs.t_goal_max = -std::numeric_limits<double>::infinity();
    cs.min_clearance = std::numeric_limits<double>::infinity();
    for (const auto& row : group) {
      cs.t_goal_mean += row.t_goal;
      cs.t_goal_min = std::min(cs.t_goal_min, row.t_goal);
      cs.t_goal_max = std::max(cs.t_goal_max, row.t_goal);
      cs.min_clearance = std::min(cs.min_clearance, row.clearance);
      cs.max_jerk = std::max(cs.max_jerk, row.jerk);
      cs.standstill_mean += row.standstill;
    }
    cs.t_goal_mean /= group.size();
    cs.standstill_mean /= group.size();
    cs.spread = cs.t_goal_max - cs.t_goal_min;
    out.push_back(cs);
  }
  return out;
}

std::string render_report(const std::vector<CategorySummary>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %5s %9s %9s %7s %10s %8s %9s\n", "category", "runs",
                "t_goal", "spread", "clear", "max_jerk", "stand", "range");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-16s %5d %9.2f %9.3f %7.2f %10.2f %8.2f %4.1f-%4.1f\n",
                  r.category.c_str(), r.count, r.t_goal_mean, r.spread, r.min_clearance,
                  r.max_jerk, r.standstill_mean, r.t_goal_min, r.t_goal_max);
    out += buf;
  }
  return out;
}

namespace {

struct SuiteRuns {
  Scenario scenario;
  std::vector<BatchRun> runs;
};

// True when any vehicle corner box overlaps a traffic participant's box.
bool run_has_collision(const Scenario& sc, const SimLog& log, std::string* what) {
  std::map<std::string, const ActorSpec*> specs;
  for (const auto& a : sc.actors) specs[a.id] = &a;
  double rear_to_center = 0.5 * sc.vehicle.wheelbase;
  for (const auto& frame : log.frames) {
    BoundingBox ego;
    ego.center = {frame.ego.x + rear_to_center * std::cos(frame.ego.heading),
                  frame.ego.y + rear_to_center * std::sin(frame.ego.heading)};
    ego.heading = frame.ego.heading;
    ego.length = sc.vehicle.length;
    ego.width = sc.vehicle.width;
    for (const auto& actor : frame.actors) {
      if (!actor.active) continue;
      auto it = sc.lane_paths.find(actor.lane);
      auto sp = specs.find(actor.id);
      if (it == sc.lane_paths.end() || sp == specs.end()) continue;
      const ReferencePath& lane = it->second;
      double s = std::clamp(actor.s, 0.0, lane.total_length);
      BoundingBox box;
      box.center = lane.position_at(s);
      box.heading = lane.heading_at(s);
      box.length = sp->second->length;
      box.width = sp->second->width;
      if (boxes_intersect(ego, box)) {
        if (what) {
          char buf[128];
          std::snprintf(buf, sizeof(buf), "t=%.2f ego hits %s", frame.t, actor.id.c_str());
          *what = buf;
        }
        return true;
      }
    }
  }
  return false;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

std::vector<AcceptanceCheck> run_acceptance_suite(const std::string& suite_path) {
  std::ifstream in(suite_path);
  if (!in) throw ConfigError("cannot open suite file: " + suite_path);
  json suite;
  in >> suite;
  int reps = suite.value("reps", 10);
  unsigned seed0 = suite.value("seed", 100u);
  if (!suite.contains("scenarios")) throw ConfigError("suite needs 'scenarios'");

  auto dir = fs::path(suite_path).parent_path();
  std::map<std::string, SuiteRuns> sets;
  for (const auto& [key, rel] : suite["scenarios"].items()) {
    SuiteRuns sr;
    sr.scenario = load_scenario((dir / rel.get<std::string>()).string());
    int n = (key == "dense") ? 1 : reps;
    sr.runs = run_batch(sr.scenario, n, seed0);
    sets.emplace(key, std::move(sr));
  }
  for (const char* key : {"no_traffic", "merge_before", "merge_behind", "gap",
                          "stop_then_merge", "blocked", "dense"}) {
    if (!sets.count(key)) throw ConfigError(std::string("suite is missing scenario '") + key + "'");
  }

  std::vector<AcceptanceCheck> checks;
  char buf[512];

  {  // no contact with traffic in any run of any scenario
    bool pass = true;
    std::string detail = "no overlaps";
    for (const auto& [key, sr] : sets) {
      for (const auto& run : sr.runs) {
        std::string what;
        if (run_has_collision(sr.scenario, run.log, &what)) {
          pass = false;
          detail = key + " seed " + std::to_string(run.seed) + ": " + what;
          break;
        }
      }
      if (!pass) break;
    }
    checks.push_back({"collision_free", pass, detail});
  }

  {  // every frame keeps all four corners inside the lane
    bool pass = true;
    double worst = std::numeric_limits<double>::infinity();
    int tight = 0;
    std::string where = "";
    for (const auto& [key, sr] : sets) {
      for (const auto& run : sr.runs) {
        if (run.record.min_clearance < worst) {
          worst = run.record.min_clearance;
          where = key + " seed " + std::to_string(run.seed);
        }
        if (run.record.min_clearance < 0.1) ++tight;
        if (run.record.frames_outside_lane > 0) pass = false;
      }
    }
    std::snprintf(buf, sizeof(buf), "min clearance %.3f m (%s), %d runs below 0.1 m", worst,
                  where.c_str(), tight);
    checks.push_back({"lane_keeping", pass, buf});
  }

  {  // category correctness and completion-time spreads
    bool pass = true;
    std::string detail;
    auto expect = [&](const char* key, auto&& ok_category) {
      for (const auto& run : sets.at(key).runs) {
        if (!ok_category(run.record.category)) {
          pass = false;
          detail += std::string(key) + " seed " + std::to_string(run.seed) +
                    " categorized as " + to_string(run.record.category) + "; ";
        }
      }
    };
    expect("no_traffic", [](ManeuverCategory c) { return c == ManeuverCategory::no_traffic; });
    expect("merge_before",
           [](ManeuverCategory c) { return c == ManeuverCategory::merge_before; });
    expect("merge_behind",
           [](ManeuverCategory c) { return c == ManeuverCategory::merge_behind; });
    expect("gap", [](ManeuverCategory c) {
      return c == ManeuverCategory::gap_class1 || c == ManeuverCategory::gap_class2;
    });
    expect("stop_then_merge",
           [](ManeuverCategory c) { return c == ManeuverCategory::stop_then_merge; });

    auto spread_t = [&](const char* key) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& run : sets.at(key).runs) {
        if (run.record.t_goal < 0.0) {
          pass = false;
          detail += std::string(key) + " seed " + std::to_string(run.seed) + " never merged; ";
          continue;
        }
        lo = std::min(lo, run.record.t_goal);
        hi = std::max(hi, run.record.t_goal);
      }
      return hi >= lo ? hi - lo : 0.0;
    };

    double sp_nt = spread_t("no_traffic");
    double sp_before = spread_t("merge_before");
    double sp_behind = spread_t("merge_behind");
    if (sp_nt > 0.15 || sp_before > 0.15) pass = false;
    if (sp_behind < 4.0 * sp_nt) pass = false;
    double min_stand = std::numeric_limits<double>::infinity();
    for (const auto& run : sets.at("stop_then_merge").runs) {
      min_stand = std::min(min_stand, run.record.standstill_time);
      if (run.record.standstill_time < 0.5) {
        pass = false;
        detail += "stop_then_merge seed " + std::to_string(run.seed) + " no standstill; ";
      }
    }
    std::snprintf(buf, sizeof(buf),
                  "spreads: free %.3f s, before %.3f s (both <= 0.15), behind %.3f s (>= 4x "
                  "free); min standstill %.2f s. %s",
                  sp_nt, sp_before, sp_behind, min_stand, detail.c_str());
    checks.push_back({"maneuver_timing", pass, buf});
  }

  {  // every accepted plan stays inside the comfort jerk bound
    bool pass = true;
    double worst = 0.0;
    std::string where = "-";
    for (const char* key :
         {"no_traffic", "merge_before", "merge_behind", "gap", "stop_then_merge"}) {
      for (const auto& run : sets.at(key).runs) {
        for (const auto& cyc : run.log.cycles) {
          if (cyc.plan_max_jerk > worst) {
            worst = cyc.plan_max_jerk;
            where = std::string(key) + " seed " + std::to_string(run.seed);
          }
        }
      }
    }
    if (worst > 1.5) pass = false;
    // Closed-form extremum sanity: a rest-to-rest profile of length D over T
    // peaks at |jerk| = 60 D / T^3 at both ends.
    TrajectorySegment ref = solve_min_jerk_segment({0.0, 0.0, 0.0}, {100.0, 0.0, 0.0}, 10.0);
    double extremum = ref.max_abs_jerk();
    if (std::abs(extremum - 6.0) > 0.05 * 6.0) pass = false;
    std::snprintf(buf, sizeof(buf),
                  "max planned |jerk| %.3f m/s^3 (%s), bound 1.5; rest-to-rest extremum "
                  "%.4f vs 6.0",
                  worst, where.c_str(), extremum);
    checks.push_back({"comfort_jerk", pass, buf});
  }

  {  // blocked junction: every returned plan keeps the stop-at-line escape
    bool pass = true;
    std::string detail = "ok";
    const auto& sr = sets.at("blocked");
    double s_stop = sr.scenario.rules.junctions.front().s_stop;
    for (const auto& run : sr.runs) {
      for (const auto& cyc : run.log.cycles) {
        if (!cyc.winner_envelope_ok) {
          pass = false;
          std::snprintf(buf, sizeof(buf), "seed %u t=%.1f winner breaks braking envelope",
                        run.seed, cyc.t);
          detail = buf;
        }
        // fail_safe_present marks junction-context cycles.
        if (cyc.fail_safe_present &&
            (cyc.winner_end_v > 0.05 || cyc.winner_end_s > s_stop + 0.15)) {
          pass = false;
          std::snprintf(buf, sizeof(buf), "seed %u t=%.1f winner ends s=%.3f v=%.3f", run.seed,
                        cyc.t, cyc.winner_end_s, cyc.winner_end_v);
          detail = buf;
        }
      }
      const auto& last = run.log.frames.back();
      if (last.ego_s > s_stop + 0.3 || last.ego.v > 0.1) {
        pass = false;
        detail = "seed " + std::to_string(run.seed) + " did not hold at the line";
      }
    }
    checks.push_back({"fail_safe_stop", pass, detail});
  }

  {  // planner latency on cycles with a wide option set
    const auto& sr = sets.at("dense");
    const auto& log = sr.runs.front().log;
    int max_options = 0;
    std::vector<double> wide;
    double worst = 0.0;
    for (const auto& cyc : log.cycles) {
      max_options = std::max(max_options, cyc.n_options);
      if (cyc.n_options >= 100) wide.push_back(cyc.plan_ms);
      worst = std::max(worst, cyc.plan_ms);
    }
    double med = median(wide);
    bool pass = max_options >= 100 && !wide.empty() && med <= 50.0;
    std::snprintf(buf, sizeof(buf),
                  "max options %d; over %zu wide cycles median %.2f ms (16 ms target, 50 ms "
                  "gate), run max %.2f ms",
                  max_options, wide.size(), med, worst);
    checks.push_back({"planning_latency", pass, buf});
  }

  {  // lateral acceleration through the S-curve stays within the comfort cap
    double worst = 0.0;
    for (const auto& run : sets.at("no_traffic").runs) {
      for (const auto& frame : run.log.frames) {
        worst = std::max(worst, std::abs(frame.a_perp));
      }
    }
    bool pass = worst <= 1.45 * 1.01;
    std::snprintf(buf, sizeof(buf), "max |a_perp| %.4f m/s^2, cap 1.45 +1%%", worst);
    checks.push_back({"tracking_lateral", pass, buf});
  }

  {  // byte-identical logs for identical seeds
    const auto& sr = sets.at("gap");
    SimLog again = run_scenario(sr.scenario, seed0);
    std::string d1 = log_digest(sr.runs.front().log);
    std::string d2 = log_digest(again);
    auto tmp = fs::temp_directory_path();
    std::string f1 = (tmp / "camp_det_a.json").string();
    std::string f2 = (tmp / "camp_det_b.json").string();
    write_log_json(sr.runs.front().log, f1);
    write_log_json(again, f2);
    auto slurp = [](const std::string& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    bool bytes_equal = slurp(f1) == slurp(f2);
    fs::remove(f1);
    fs::remove(f2);
    bool pass = d1 == d2 && bytes_equal;
    checks.push_back({"determinism", pass,
                      "digest " + d1 + (d1 == d2 ? " == " : " != ") + d2 +
                          (bytes_equal ? ", files byte-identical" : ", files differ")});
  }

  return checks;
}

}  // namespace camp
