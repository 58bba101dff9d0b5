#include "camp/world.hpp"

#include <algorithm>
#include <cmath>

namespace camp {

namespace {

bool inside_any(const std::vector<std::vector<Vec2>>& polygons, const Vec2& p) {
  for (const auto& poly : polygons) {
    if (point_in_polygon(poly, p)) return true;
  }
  return false;
}

bool line_of_sight(const std::vector<std::vector<Vec2>>& occluders, const Vec2& a,
                   const Vec2& b) {
  for (const auto& poly : occluders) {
    if (segment_intersects_polygon(poly, a, b)) return false;
  }
  return true;
}

bool is_violator(const DetectedObject& obj, double v_sl) {
  return obj.v > 1.3 * v_sl || obj.v < -0.3;
}

}  // namespace

std::vector<ObjectPrediction> merge_object_lists(
    const std::vector<DetectedObject>& onboard,
    const std::vector<DetectedObject>& infrastructure, double now,
    const std::vector<std::string>& relevant_lanes, double v_sl,
    const std::map<std::string, double>& lane_offsets, const RiskConfig& risk,
    double gate_m, MergeDebug* debug) {
  MergeDebug local;
  local.onboard = static_cast<int>(onboard.size());
  local.infrastructure = static_cast<int>(infrastructure.size());

  struct Entry {
    DetectedObject state;  // advanced to `now`
    bool from_onboard = false;
    bool from_infra = false;
  };
  std::map<std::string, Entry> table;

  for (const auto& det : onboard) {
    Entry e;
    e.state = det;
    e.state.s += det.v * (now - det.t_stamp);
    e.state.t_stamp = now;
    e.from_onboard = true;
    table[det.id] = e;
  }
  for (const auto& det : infrastructure) {
    DetectedObject adv = det;
    adv.s += det.v * (now - det.t_stamp);
    adv.t_stamp = now;
    auto it = table.find(det.id);
    if (it == table.end()) {
      Entry e;
      e.state = adv;
      e.from_infra = true;
      table[det.id] = e;
      continue;
    }
    Entry& e = it->second;
    if (std::abs(e.state.s - adv.s) > gate_m) {
      // Disagreement beyond the gate: trust the onboard track alone.
      local.discrepant_ids.push_back(det.id);
      continue;
    }
    e.state.s = 0.5 * (e.state.s + adv.s);
    e.state.v = 0.5 * (e.state.v + adv.v);
    e.from_infra = true;
    ++local.fused;
  }

  std::vector<ObjectPrediction> out;
  for (const auto& [id, entry] : table) {
    const DetectedObject& obj = entry.state;
    bool relevant = std::find(relevant_lanes.begin(), relevant_lanes.end(), obj.lane) !=
                    relevant_lanes.end();
    bool violator = is_violator(obj, v_sl);
    if (!relevant && !violator) {
      ++local.dropped_irrelevant;
      continue;
    }
    if (!relevant && violator) ++local.violators_kept;

    double s_ego;
    if (obj.lane == "ego") {
      s_ego = obj.s;
    } else {
      auto it = lane_offsets.find(obj.lane);
      if (it == lane_offsets.end()) {
        ++local.dropped_irrelevant;
        continue;
      }
      s_ego = obj.s - it->second;
    }

    ObjectPrediction pred;
    pred.id = obj.id;
    pred.lane = obj.lane;
    pred.s0 = s_ego;
    pred.v = obj.v;
    pred.sigma0 = risk.eos_sigma0;
    pred.sigma_rate = risk.eos_sigma_rate;
    pred.horizon = 10.0;
    pred.source = obj.source;
    out.push_back(std::move(pred));
  }
  if (debug) *debug = local;
  return out;
}

World::World(const Scenario& scenario, unsigned seed) : sc_(scenario), rng_(seed) {
  states_.resize(sc_.actors.size());
  histories_.resize(sc_.actors.size());
  accel_.assign(sc_.actors.size(), 0.0);
  done_.assign(sc_.actors.size(), false);
  for (std::size_t i = 0; i < sc_.actors.size(); ++i) {
    const auto& spec = sc_.actors[i];
    states_[i].id = spec.id;
    states_[i].lane = spec.lane;
    states_[i].s = spec.s0;
    states_[i].v = spec.v0;
    states_[i].active = spec.spawn_time <= 0.0;
    refresh_state(i);
    if (states_[i].active) histories_[i].samples.push_back({0.0, spec.s0, spec.v0});
  }
}

void World::refresh_state(std::size_t i) {
  auto& st = states_[i];
  auto it = sc_.lane_paths.find(st.lane);
  if (it == sc_.lane_paths.end()) return;
  const ReferencePath& path = it->second;
  double s = std::clamp(st.s, 0.0, path.total_length);
  st.position = path.position_at(s);
  st.heading = path.heading_at(s);
}

void World::step(double dt) {
  double t_next = time_ + dt;
  for (std::size_t i = 0; i < sc_.actors.size(); ++i) {
    const auto& spec = sc_.actors[i];
    auto& st = states_[i];
    if (!st.active) {
      if (!done_[i] && t_next >= spec.spawn_time) {
        st.active = true;
        st.s = spec.s0;
        st.v = spec.v0;
        refresh_state(i);
        histories_[i].samples.push_back({t_next, st.s, st.v});
      }
      continue;
    }

    double a = 0.0;
    if (spec.behavior == ActorBehavior::idm_follow) {
      const ActorState* lead = nullptr;
      for (const auto& other : states_) {
        if (&other == &st || !other.active || other.lane != st.lane) continue;
        if (other.s <= st.s) continue;
        if (!lead || other.s < lead->s) lead = &other;
      }
      double v0 = std::max(spec.idm_v0, 0.1);
      double free_term = std::pow(st.v / v0, 4.0);
      double inter = 0.0;
      if (lead) {
        double gap = lead->s - st.s - 0.5 * spec.length - 2.3;
        gap = std::max(gap, 0.1);
        double dv = st.v - lead->v;
        double s_star = spec.idm_s0 + st.v * spec.idm_T +
                        st.v * dv / (2.0 * std::sqrt(spec.idm_a * spec.idm_b));
        s_star = std::max(s_star, 0.0);
        inter = (s_star / gap) * (s_star / gap);
      }
      a = spec.idm_a * (1.0 - free_term - inter);
    }
    accel_[i] = a;

    st.s += st.v * dt + 0.5 * a * dt * dt;
    st.v = std::max(st.v + a * dt, 0.0);
    if (spec.behavior == ActorBehavior::turn_off_at && st.s >= spec.turn_off_s) {
      st.active = false;
      done_[i] = true;
    }
    auto it = sc_.lane_paths.find(st.lane);
    if (it != sc_.lane_paths.end() && st.s > it->second.total_length + 5.0) {
      st.active = false;
      done_[i] = true;
    }
    refresh_state(i);

    auto& hist = histories_[i].samples;
    hist.push_back({t_next, st.s, st.v});
    while (hist.size() > 2 && hist.front()[0] < t_next - 2.0) hist.pop_front();
  }
  time_ = t_next;
}

std::vector<DetectedObject> World::sense_onboard(const Vec2& ego_position, double now) {
  std::vector<DetectedObject> out;
  std::normal_distribution<double> pos_noise(0.0, std::max(sc_.sensors.ego_jitter.pos_sd, 1e-12));
  std::normal_distribution<double> vel_noise(0.0, std::max(sc_.sensors.ego_jitter.vel_sd, 1e-12));
  for (const auto& st : states_) {
    if (!st.active) continue;
    double np = pos_noise(rng_);
    double nv = vel_noise(rng_);
    Vec2 d{st.position.x - ego_position.x, st.position.y - ego_position.y};
    if (d.norm() > sc_.sensors.ego_range) continue;
    if (!sc_.sensors.ego_fov.empty() && !inside_any(sc_.sensors.ego_fov, st.position)) continue;
    if (!line_of_sight(sc_.sensors.occluders, ego_position, st.position)) continue;
    DetectedObject det;
    det.id = st.id;
    det.lane = st.lane;
    det.s = st.s + (sc_.sensors.ego_jitter.pos_sd > 0.0 ? np : 0.0);
    det.v = st.v + (sc_.sensors.ego_jitter.vel_sd > 0.0 ? nv : 0.0);
    det.source = ObjectSource::ego;
    det.t_stamp = now;
    out.push_back(std::move(det));
  }
  return out;
}

std::vector<DetectedObject> World::sense_infrastructure(double now) {
  std::vector<DetectedObject> out;
  if (sc_.sensors.ext_fov.empty()) return out;
  double tm = now - sc_.sensors.ext_latency;
  std::normal_distribution<double> pos_noise(0.0, std::max(sc_.sensors.ext_jitter.pos_sd, 1e-12));
  std::normal_distribution<double> vel_noise(0.0, std::max(sc_.sensors.ext_jitter.vel_sd, 1e-12));
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const auto& st = states_[i];
    double np = pos_noise(rng_);
    double nv = vel_noise(rng_);
    const auto& hist = histories_[i].samples;
    if (hist.empty() || hist.front()[0] > tm) continue;
    // interpolate the state at the (delayed) measurement time
    double s = hist.back()[1], v = hist.back()[2];
    for (std::size_t k = 1; k < hist.size(); ++k) {
      if (hist[k][0] >= tm) {
        double t0 = hist[k - 1][0], t1 = hist[k][0];
        double w = t1 > t0 ? (tm - t0) / (t1 - t0) : 1.0;
        s = hist[k - 1][1] + w * (hist[k][1] - hist[k - 1][1]);
        v = hist[k - 1][2] + w * (hist[k][2] - hist[k - 1][2]);
        break;
      }
    }
    if (!st.active && hist.back()[0] < tm) continue;
    auto it = sc_.lane_paths.find(st.lane);
    if (it == sc_.lane_paths.end()) continue;
    Vec2 pos = it->second.position_at(std::clamp(s, 0.0, it->second.total_length));
    if (!inside_any(sc_.sensors.ext_fov, pos)) continue;
    DetectedObject det;
    det.id = st.id;
    det.lane = st.lane;
    det.s = s + (sc_.sensors.ext_jitter.pos_sd > 0.0 ? np : 0.0);
    det.v = v + (sc_.sensors.ext_jitter.vel_sd > 0.0 ? nv : 0.0);
    det.source = ObjectSource::external;
    det.t_stamp = tm;
    out.push_back(std::move(det));
  }
  return out;
}

std::vector<ObjectPrediction> World::sensed_objects(
    const Vec2& ego_position, double now, const std::vector<std::string>& relevant_lanes,
    MergeDebug* debug) {
  auto onboard = sense_onboard(ego_position, now);
  auto infra = sense_infrastructure(now);
  return merge_object_lists(onboard, infra, now, relevant_lanes, sc_.rules.v_sl,
                            sc_.lane_offsets, sc_.risk, 2.0, debug);
}

}  // namespace camp
