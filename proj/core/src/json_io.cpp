#include "camp/json_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace camp {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error in " + path + ": " + e.what());
  }
  return j;
}

void deep_merge(json& base, const json& overlay) {
  if (!base.is_object() || !overlay.is_object()) {
    base = overlay;
    return;
  }
  for (const auto& [key, value] : overlay.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      deep_merge(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& section) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw ConfigError("unknown field '" + key + "' in section '" + section + "'");
    }
  }
}

double num(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("field '" + key + "' must be a number");
  return j[key].get<double>();
}

Vec2 vec2(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError("expected [x, y] pair in " + context);
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<std::vector<Vec2>> polygons(const json& j, const std::string& section) {
  std::vector<std::vector<Vec2>> out;
  if (!j.is_array()) throw ConfigError("section '" + section + "' must be a polygon list");
  for (const auto& poly : j) {
    std::vector<Vec2> pts;
    for (const auto& p : poly) pts.push_back(vec2(p, section));
    if (pts.size() < 3) throw ConfigError("polygon with fewer than 3 points in " + section);
    out.push_back(std::move(pts));
  }
  return out;
}

ReferencePath parse_path(const json& j, const std::string& section) {
  check_keys(j, {"start", "heading_deg", "segments", "resample"}, section);
  if (!j.contains("start") || !j.contains("segments")) {
    throw ConfigError("section '" + section + "' needs 'start' and 'segments'");
  }
  Vec2 start = vec2(j["start"], section);
  double heading = num(j, "heading_deg", 0.0) * kPi / 180.0;
  double resample = num(j, "resample", 0.25);

  std::vector<PathSegmentSpec> specs;
  for (const auto& seg : j["segments"]) {
    check_keys(seg, {"kind", "length", "radius", "angle_deg"}, section + ".segments");
    std::string kind = seg.value("kind", "");
    PathSegmentSpec spec;
    if (kind == "straight") {
      spec.kind = PathSegmentSpec::Kind::straight;
      spec.length = num(seg, "length", 0.0);
      if (spec.length <= 0.0) throw ConfigError("straight segment needs positive length");
    } else if (kind == "arc") {
      spec.kind = PathSegmentSpec::Kind::arc;
      spec.radius = num(seg, "radius", 0.0);
      double angle = num(seg, "angle_deg", 0.0) * kPi / 180.0;
      if (spec.radius == 0.0 || angle <= 0.0) {
        throw ConfigError("arc segment needs nonzero radius and positive angle_deg");
      }
      // Sweep sign follows the turn direction given by the radius sign.
      spec.angle = spec.radius > 0.0 ? angle : -angle;
    } else {
      throw ConfigError("unknown segment kind '" + kind + "' in " + section);
    }
    specs.push_back(spec);
  }
  auto waypoints = expand_segments(start, heading, specs, resample);
  return build_path(waypoints, resample);
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  json j = read_json_file(path);
  if (j.contains("extends")) {
    auto dir = std::filesystem::path(path).parent_path();
    std::string base_rel = j["extends"].get<std::string>();
    json base = read_json_file((dir / base_rel).string());
    if (base.contains("extends")) {
      throw ConfigError("nested 'extends' is not supported: " + base_rel);
    }
    j.erase("extends");
    deep_merge(base, j);
    j = std::move(base);
  }

  check_keys(j, {"name", "ego_path", "lanes", "lane_offsets", "rules", "constraints",
                 "risk", "reliability", "sampler", "planner", "tracker", "vehicle",
                 "sensors", "actors", "ego_start", "run"},
             "scenario");

  Scenario sc;
  sc.name = j.value("name", "unnamed");
  if (!j.contains("ego_path")) throw ConfigError("scenario needs 'ego_path'");
  sc.ego_path = parse_path(j["ego_path"], "ego_path");
  sc.lane_paths["ego"] = sc.ego_path;

  if (j.contains("lanes")) {
    for (const auto& [lane, spec] : j["lanes"].items()) {
      sc.lane_paths[lane] = parse_path(spec, "lanes." + lane);
    }
  }
  if (j.contains("lane_offsets")) {
    for (const auto& [lane, off] : j["lane_offsets"].items()) {
      sc.lane_offsets[lane] = off.get<double>();
    }
  }

  if (j.contains("rules")) {
    const json& r = j["rules"];
    check_keys(r, {"v_sl", "junctions"}, "rules");
    sc.rules.v_sl = num(r, "v_sl", sc.rules.v_sl);
    if (r.contains("junctions")) {
      for (const auto& jn : r["junctions"]) {
        check_keys(jn, {"s_stop", "s_pga", "conflict_lo", "conflict_hi", "main_offset"},
                   "rules.junctions");
        YieldJunction y;
        y.s_stop = num(jn, "s_stop", 0.0);
        y.s_pga = num(jn, "s_pga", 0.0);
        y.conflict_lo = num(jn, "conflict_lo", 0.0);
        y.conflict_hi = num(jn, "conflict_hi", 0.0);
        y.main_offset = num(jn, "main_offset", 0.0);
        sc.rules.junctions.push_back(y);
      }
    }
  }

  if (j.contains("constraints")) {
    const json& c = j["constraints"];
    check_keys(c, {"a_min", "a_max", "a_perp_max", "t_pred", "p_risk_max"}, "constraints");
    sc.constraints.a_min = num(c, "a_min", sc.constraints.a_min);
    sc.constraints.a_max = num(c, "a_max", sc.constraints.a_max);
    sc.constraints.a_perp_max = num(c, "a_perp_max", sc.constraints.a_perp_max);
    sc.constraints.T_pred = num(c, "t_pred", sc.constraints.T_pred);
    sc.constraints.p_risk_max = num(c, "p_risk_max", sc.constraints.p_risk_max);
  }

  if (j.contains("risk")) {
    const json& r = j["risk"];
    check_keys(r, {"s_minus0", "s_plus0", "headway", "time_step", "eos"}, "risk");
    sc.risk.s_minus0 = num(r, "s_minus0", sc.risk.s_minus0);
    sc.risk.s_plus0 = num(r, "s_plus0", sc.risk.s_plus0);
    sc.risk.headway = num(r, "headway", sc.risk.headway);
    sc.risk.time_step = num(r, "time_step", sc.risk.time_step);
    if (r.contains("eos")) {
      const json& e = r["eos"];
      check_keys(e, {"enabled", "position_main", "position_ego", "speed", "clear_len",
                     "sigma0", "sigma_rate"},
                 "risk.eos");
      sc.risk.eos_enabled = e.value("enabled", true);
      if (e.contains("position_ego")) {
        sc.risk.eos_position = num(e, "position_ego", 0.0);
      } else if (e.contains("position_main")) {
        auto it = sc.lane_offsets.find("main");
        if (it == sc.lane_offsets.end()) {
          throw ConfigError("risk.eos.position_main needs lane_offsets.main");
        }
        sc.risk.eos_position = num(e, "position_main", 0.0) - it->second;
      }
      sc.risk.eos_speed = num(e, "speed", sc.rules.v_sl);
      sc.risk.eos_clear_until = sc.risk.eos_position + num(e, "clear_len", 15.0);
      sc.risk.eos_sigma0 = num(e, "sigma0", sc.risk.eos_sigma0);
      sc.risk.eos_sigma_rate = num(e, "sigma_rate", sc.risk.eos_sigma_rate);
    } else {
      sc.risk.eos_enabled = false;
    }
  } else {
    sc.risk.eos_enabled = false;
  }

  if (j.contains("reliability")) {
    const json& r = j["reliability"];
    check_keys(r, {"beta_a", "beta_b", "alpha"}, "reliability");
    sc.reliability.beta_a = num(r, "beta_a", sc.reliability.beta_a);
    sc.reliability.beta_b = num(r, "beta_b", sc.reliability.beta_b);
    sc.reliability.alpha = num(r, "alpha", sc.reliability.alpha);
  }

  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    check_keys(s, {"v_min", "v_step", "time_step", "times_per_gap", "gap_margin",
                   "min_gap", "stop_time_samples", "cruise_time_samples",
                   "follow_t1_samples", "follow_t2_samples", "max_options"},
               "sampler");
    sc.sampler.v_min = num(s, "v_min", sc.sampler.v_min);
    sc.sampler.v_step = num(s, "v_step", sc.sampler.v_step);
    sc.sampler.time_step = num(s, "time_step", sc.sampler.time_step);
    sc.sampler.times_per_gap = static_cast<int>(num(s, "times_per_gap", sc.sampler.times_per_gap));
    sc.sampler.gap_margin = num(s, "gap_margin", sc.sampler.gap_margin);
    sc.sampler.min_gap = num(s, "min_gap", sc.sampler.min_gap);
    sc.sampler.stop_time_samples =
        static_cast<int>(num(s, "stop_time_samples", sc.sampler.stop_time_samples));
    sc.sampler.cruise_time_samples =
        static_cast<int>(num(s, "cruise_time_samples", sc.sampler.cruise_time_samples));
    sc.sampler.follow_t1_samples =
        static_cast<int>(num(s, "follow_t1_samples", sc.sampler.follow_t1_samples));
    sc.sampler.follow_t2_samples =
        static_cast<int>(num(s, "follow_t2_samples", sc.sampler.follow_t2_samples));
    sc.sampler.max_options = static_cast<int>(num(s, "max_options", sc.sampler.max_options));
  }

  if (j.contains("planner")) {
    const json& p = j["planner"];
    check_keys(p, {"w_tf", "scan_step", "early_exit"}, "planner");
    sc.planner.w_tf = num(p, "w_tf", sc.planner.w_tf);
    sc.planner.scan_step = num(p, "scan_step", sc.planner.scan_step);
    sc.planner.early_exit = p.value("early_exit", sc.planner.early_exit);
  }

  if (j.contains("tracker")) {
    const json& t = j["tracker"];
    check_keys(t, {"horizon_steps", "dt", "w_s", "w_d", "w_phi", "w_v", "w_a", "r_jerk",
                   "r_steer_rate", "rho_aperp", "rho_steer", "rho_vneg", "a_perp_max",
                   "u_jerk_max", "u_steer_rate_max", "max_iters"},
               "tracker");
    sc.tracker.horizon_steps = static_cast<int>(num(t, "horizon_steps", sc.tracker.horizon_steps));
    sc.tracker.dt = num(t, "dt", sc.tracker.dt);
    sc.tracker.w_s = num(t, "w_s", sc.tracker.w_s);
    sc.tracker.w_d = num(t, "w_d", sc.tracker.w_d);
    sc.tracker.w_phi = num(t, "w_phi", sc.tracker.w_phi);
    sc.tracker.w_v = num(t, "w_v", sc.tracker.w_v);
    sc.tracker.w_a = num(t, "w_a", sc.tracker.w_a);
    sc.tracker.r_jerk = num(t, "r_jerk", sc.tracker.r_jerk);
    sc.tracker.r_steer_rate = num(t, "r_steer_rate", sc.tracker.r_steer_rate);
    sc.tracker.rho_aperp = num(t, "rho_aperp", sc.tracker.rho_aperp);
    sc.tracker.rho_steer = num(t, "rho_steer", sc.tracker.rho_steer);
    sc.tracker.rho_vneg = num(t, "rho_vneg", sc.tracker.rho_vneg);
    sc.tracker.a_perp_max = num(t, "a_perp_max", sc.tracker.a_perp_max);
    sc.tracker.u_jerk_max = num(t, "u_jerk_max", sc.tracker.u_jerk_max);
    sc.tracker.u_steer_rate_max = num(t, "u_steer_rate_max", sc.tracker.u_steer_rate_max);
    sc.tracker.max_iters = static_cast<int>(num(t, "max_iters", sc.tracker.max_iters));
  }

  if (j.contains("vehicle")) {
    const json& v = j["vehicle"];
    check_keys(v, {"wheelbase", "v_char", "steer_max", "length", "width"}, "vehicle");
    sc.vehicle.wheelbase = num(v, "wheelbase", sc.vehicle.wheelbase);
    sc.vehicle.v_char = num(v, "v_char", sc.vehicle.v_char);
    sc.vehicle.steer_max = num(v, "steer_max", sc.vehicle.steer_max);
    sc.vehicle.length = num(v, "length", sc.vehicle.length);
    sc.vehicle.width = num(v, "width", sc.vehicle.width);
  }

  if (j.contains("sensors")) {
    const json& s = j["sensors"];
    check_keys(s, {"ego_range", "ext_latency", "ego_fov", "ext_fov", "occluders",
                   "ego_jitter", "ext_jitter"},
               "sensors");
    sc.sensors.ego_range = num(s, "ego_range", sc.sensors.ego_range);
    sc.sensors.ext_latency = num(s, "ext_latency", sc.sensors.ext_latency);
    if (s.contains("ego_fov")) sc.sensors.ego_fov = polygons(s["ego_fov"], "sensors.ego_fov");
    if (s.contains("ext_fov")) sc.sensors.ext_fov = polygons(s["ext_fov"], "sensors.ext_fov");
    if (s.contains("occluders"))
      sc.sensors.occluders = polygons(s["occluders"], "sensors.occluders");
    if (s.contains("ego_jitter")) {
      check_keys(s["ego_jitter"], {"pos_sd", "vel_sd"}, "sensors.ego_jitter");
      sc.sensors.ego_jitter.pos_sd = num(s["ego_jitter"], "pos_sd", 0.0);
      sc.sensors.ego_jitter.vel_sd = num(s["ego_jitter"], "vel_sd", 0.0);
    }
    if (s.contains("ext_jitter")) {
      check_keys(s["ext_jitter"], {"pos_sd", "vel_sd"}, "sensors.ext_jitter");
      sc.sensors.ext_jitter.pos_sd = num(s["ext_jitter"], "pos_sd", 0.0);
      sc.sensors.ext_jitter.vel_sd = num(s["ext_jitter"], "vel_sd", 0.0);
    }
  }

  if (j.contains("actors")) {
    for (const auto& a : j["actors"]) {
      check_keys(a, {"id", "lane", "s0", "v0", "spawn_time", "behavior", "turn_off_s",
                     "length", "width", "idm"},
                 "actors");
      ActorSpec spec;
      spec.id = a.value("id", "");
      if (spec.id.empty()) throw ConfigError("actor without id");
      spec.lane = a.value("lane", "main");
      spec.s0 = num(a, "s0", 0.0);
      spec.v0 = num(a, "v0", 0.0);
      spec.spawn_time = num(a, "spawn_time", 0.0);
      spec.turn_off_s = num(a, "turn_off_s", 0.0);
      spec.length = num(a, "length", spec.length);
      spec.width = num(a, "width", spec.width);
      std::string behavior = a.value("behavior", "constant_speed");
      if (behavior == "constant_speed") {
        spec.behavior = ActorBehavior::constant_speed;
      } else if (behavior == "idm_follow") {
        spec.behavior = ActorBehavior::idm_follow;
      } else if (behavior == "turn_off_at") {
        spec.behavior = ActorBehavior::turn_off_at;
      } else {
        throw ConfigError("unknown actor behavior '" + behavior + "'");
      }
      if (a.contains("idm")) {
        const json& idm = a["idm"];
        check_keys(idm, {"v0", "T", "a", "b", "s0"}, "actors.idm");
        spec.idm_v0 = num(idm, "v0", spec.idm_v0);
        spec.idm_T = num(idm, "T", spec.idm_T);
        spec.idm_a = num(idm, "a", spec.idm_a);
        spec.idm_b = num(idm, "b", spec.idm_b);
        spec.idm_s0 = num(idm, "s0", spec.idm_s0);
      }
      if (!sc.lane_paths.count(spec.lane)) {
        throw ConfigError("actor '" + spec.id + "' references unknown lane '" + spec.lane + "'");
      }
      sc.actors.push_back(std::move(spec));
    }
  }

  if (j.contains("ego_start")) {
    const json& e = j["ego_start"];
    check_keys(e, {"s", "v", "a"}, "ego_start");
    sc.ego_start.s = num(e, "s", 0.0);
    sc.ego_start.v = num(e, "v", 8.33);
    sc.ego_start.a = num(e, "a", 0.0);
  }

  if (j.contains("run")) {
    const json& r = j["run"];
    check_keys(r, {"duration", "plan_period", "sim_dt", "lane_width", "goal_margin"}, "run");
    sc.duration = num(r, "duration", sc.duration);
    sc.plan_period = num(r, "plan_period", sc.plan_period);
    sc.sim_dt = num(r, "sim_dt", sc.sim_dt);
    sc.lane_width = num(r, "lane_width", sc.lane_width);
    sc.goal_margin = num(r, "goal_margin", sc.goal_margin);
  }

  for (const auto& jn : sc.rules.junctions) {
    if (jn.s_pga > sc.ego_path.total_length) {
      throw ConfigError("junction merge end lies beyond the ego path");
    }
  }
  return sc;
}

namespace {

json log_to_json(const SimLog& log) {
  json j;
  j["scenario"] = log.scenario;
  j["seed"] = log.seed;
  j["reached_goal"] = log.reached_goal;
  j["t_goal"] = log.t_goal;
  j["t_end"] = log.t_end;
  json frames = json::array();
  for (const auto& f : log.frames) {
    json jf;
    jf["t"] = f.t;
    jf["x"] = f.ego.x;
    jf["y"] = f.ego.y;
    jf["heading"] = f.ego.heading;
    jf["v"] = f.ego.v;
    jf["a"] = f.ego.a;
    jf["steer"] = f.ego.steer;
    jf["s"] = f.ego_s;
    jf["d"] = f.ego_d;
    jf["a_perp"] = f.a_perp;
    json actors = json::array();
    for (const auto& a : f.actors) {
      actors.push_back({{"id", a.id}, {"lane", a.lane}, {"s", a.s}, {"v", a.v},
                        {"active", a.active}});
    }
    jf["actors"] = std::move(actors);
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);

  json cycles = json::array();
  for (const auto& c : log.cycles) {
    json jc;
    jc["t"] = c.t;
    jc["ego_s"] = c.ego_s;
    jc["ego_v"] = c.ego_v;
    jc["ego_a"] = c.ego_a;
    jc["context"] = c.context_index;
    jc["n_options"] = c.n_options;
    jc["evaluated"] = c.evaluated;
    jc["winner"] = c.winner_label;
    jc["kind"] = to_string(c.winner_kind);
    jc["importance"] = c.winner_importance;
    jc["cost"] = c.best_cost;
    jc["p_risk"] = c.p_risk;
    jc["p_rel"] = c.p_rel;
    jc["t_pnr"] = c.t_pnr;
    jc["t_pga"] = c.t_pga;
    jc["plan_max_jerk"] = c.plan_max_jerk;
    jc["winner_end_s"] = c.winner_end_s;
    jc["winner_end_v"] = c.winner_end_v;
    jc["winner_envelope_ok"] = c.winner_envelope_ok;
    jc["committed"] = c.committed;
    jc["fail_safe_present"] = c.fail_safe_present;
    jc["fail_safe_end_s"] = c.fail_safe_end_s;
    jc["fail_safe_kinematic_ok"] = c.fail_safe_kinematic_ok;
    jc["eos_active"] = c.eos_active;
    json objs = json::array();
    for (const auto& o : c.objects) {
      objs.push_back({{"id", o.id},
                      {"lane", o.lane},
                      {"s", o.s},
                      {"v", o.v},
                      {"source", o.source == ObjectSource::ego
                                     ? "ego"
                                     : (o.source == ObjectSource::external ? "external"
                                                                           : "virtual_eos")}});
    }
    jc["objects"] = std::move(objs);
    cycles.push_back(std::move(jc));
  }
  j["cycles"] = std::move(cycles);
  return j;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_log_json(const SimLog& log, const std::string& path) {
  write_text(path, log_to_json(log).dump() + "\n");
}

void write_frames_csv(const SimLog& log, const std::string& path) {
  std::string out = "t,x,y,heading,v,a,steer,s,d,a_perp\n";
  for (const auto& f : log.frames) {
    out += fmt(f.t) + "," + fmt(f.ego.x) + "," + fmt(f.ego.y) + "," + fmt(f.ego.heading) +
           "," + fmt(f.ego.v) + "," + fmt(f.ego.a) + "," + fmt(f.ego.steer) + "," +
           fmt(f.ego_s) + "," + fmt(f.ego_d) + "," + fmt(f.a_perp) + "\n";
  }
  write_text(path, out);
}

void write_cycles_csv(const SimLog& log, const std::string& path) {
  std::string out =
      "t,ego_s,ego_v,ego_a,context,n_options,evaluated,kind,importance,cost,p_risk,"
      "t_pnr,t_pga,plan_max_jerk,winner_end_s,winner_end_v,envelope_ok,committed,winner\n";
  for (const auto& c : log.cycles) {
    out += fmt(c.t) + "," + fmt(c.ego_s) + "," + fmt(c.ego_v) + "," + fmt(c.ego_a) + "," +
           std::to_string(c.context_index) + "," + std::to_string(c.n_options) + "," +
           std::to_string(c.evaluated) + "," + to_string(c.winner_kind) + "," +
           std::to_string(c.winner_importance) + "," + fmt(c.best_cost) + "," +
           fmt(c.p_risk) + "," + fmt(c.t_pnr) + "," + fmt(c.t_pga) + "," +
           fmt(c.plan_max_jerk) + "," + fmt(c.winner_end_s) + "," + fmt(c.winner_end_v) +
           "," + (c.winner_envelope_ok ? "1" : "0") + "," + (c.committed ? "1" : "0") + "," +
           c.winner_label + "\n";
  }
  write_text(path, out);
}

void write_timings_json(const SimLog& log, const std::string& path) {
  std::vector<double> times;
  times.reserve(log.cycles.size());
  for (const auto& c : log.cycles) times.push_back(c.plan_ms);
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  auto pct = [&](double p) {
    if (sorted.empty()) return 0.0;
    double idx = p * (sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (idx - lo);
  };
  json j;
  j["scenario"] = log.scenario;
  j["seed"] = log.seed;
  j["plan_ms"] = times;
  j["p50"] = pct(0.5);
  j["p95"] = pct(0.95);
  j["max"] = sorted.empty() ? 0.0 : sorted.back();
  write_text(path, j.dump() + "\n");
}

std::string log_digest(const SimLog& log) {
  std::string bytes = log_to_json(log).dump();
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace camp
