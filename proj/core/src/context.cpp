#include "camp/context.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace camp {

namespace {

double lerp(double a, double b, double w) { return a + (b - a) * w; }

std::string format_label(const char* fmt, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

}  // namespace

double SpeedProfile::at(double query) const {
  if (s.empty()) return 0.0;
  if (query <= s.front()) return v.front();
  if (query >= s.back()) return v.back();
  auto it = std::upper_bound(s.begin(), s.end(), query);
  std::size_t i = static_cast<std::size_t>(it - s.begin());
  double w = (query - s[i - 1]) / (s[i] - s[i - 1]);
  return lerp(v[i - 1], v[i], w);
}

double StepProfile::at(double query) const {
  if (v.empty()) return 0.0;
  auto it = std::upper_bound(s_break.begin(), s_break.end(), query);
  if (it == s_break.begin()) return v.front();
  std::size_t i = static_cast<std::size_t>(it - s_break.begin()) - 1;
  if (i >= v.size()) i = v.size() - 1;
  return v[i];
}

double ConstraintSet::v_max_at(double s, double t) const {
  double bound = v_static.at(s);
  if (lead && s >= lead->boundary_at(t)) {
    bound = std::min(bound, lead->lead.speed_at(t));
  }
  return bound;
}

const char* to_string(BehaviorKind kind) {
  switch (kind) {
    case BehaviorKind::merge_dynamic: return "merge_dynamic";
    case BehaviorKind::follow_then_merge: return "follow_then_merge";
    case BehaviorKind::follow_then_stop: return "follow_then_stop";
    case BehaviorKind::gentle_stop: return "gentle_stop";
    case BehaviorKind::fail_safe: return "fail_safe";
  }
  return "unknown";
}

SpeedProfile speed_limit_profile(const ReferencePath& path, const SpeedProfile& v_sl,
                                 double a_perp_max) {
  SpeedProfile out;
  out.s.reserve(path.samples.size());
  out.v.reserve(path.samples.size());
  for (const auto& ps : path.samples) {
    double kappa = std::abs(ps.curvature);
    double curve_bound = kappa > 1e-9 ? std::sqrt(a_perp_max / kappa)
                                      : std::numeric_limits<double>::infinity();
    out.s.push_back(ps.s);
    out.v.push_back(std::min(v_sl.at(ps.s), curve_bound));
  }
  return out;
}

SpeedProfile speed_limit_profile(const ReferencePath& path, double v_sl,
                                 double a_perp_max) {
  SpeedProfile flat;
  flat.s = {0.0, path.total_length};
  flat.v = {v_sl, v_sl};
  return speed_limit_profile(path, flat, a_perp_max);
}

StepProfile segmentwise_constant(const SpeedProfile& profile, const ReferencePath& path,
                                 double kappa_threshold) {
  StepProfile out;
  if (path.samples.empty()) return out;

  auto classify = [&](const PathSample& ps) -> int {
    if (std::abs(ps.curvature) < kappa_threshold) return 0;
    return ps.curvature > 0.0 ? 1 : -1;
  };

  std::size_t run_start = 0;
  int run_class = classify(path.samples[0]);
  auto flush = [&](std::size_t end) {
    double lo = path.samples[run_start].s;
    double vmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = run_start; i < end; ++i) {
      vmin = std::min(vmin, profile.at(path.samples[i].s));
    }
    if (!out.v.empty() && std::abs(out.v.back() - vmin) < 1e-9) return;
    out.s_break.push_back(out.v.empty() ? 0.0 : lo);
    out.v.push_back(vmin);
  };

  for (std::size_t i = 1; i < path.samples.size(); ++i) {
    int c = classify(path.samples[i]);
    if (c != run_class) {
      flush(i);
      run_start = i;
      run_class = c;
    }
  }
  flush(path.samples.size());
  return out;
}

double compute_pnr(double v, double a_min, double s_stop) {
  return s_stop - v * v / (2.0 * std::abs(a_min));
}

namespace {

// Largest speed change reachable over `dist` with chord-matched quintic
// timing without exceeding the comfort envelope: peak acceleration of such a
// leg is 1.5 |dv| / T and peak jerk about 5.77 |dv| / T^2, with
// T = dist / avg(v0, v1). Fixed point converges in a few rounds.
double chord_cap_speed(double v0, double v_want, double dist, double a_ref,
                       double j_ref) {
  double d = v_want - v0;
  for (int i = 0; i < 4; ++i) {
    double T = dist / std::max(v0 + 0.5 * d, 0.3);
    double cap = std::min(a_ref * T / 1.5, j_ref * T * T / 5.77);
    d = std::clamp(v_want - v0, -cap, cap);
  }
  return v0 + d;
}

JunctionInfo derive_junction_info(const YieldJunction& rule, const ConstraintSet& cs,
                                  double v_sl) {
  JunctionInfo info;
  info.rule = rule;
  const StepProfile& prof = cs.v_static;

  // Last reduced-speed segment between stop line and merge end.
  info.has_curve = false;
  for (std::size_t i = 0; i < prof.v.size(); ++i) {
    double lo = prof.s_break[i];
    double hi = i + 1 < prof.s_break.size() ? prof.s_break[i + 1]
                                            : std::numeric_limits<double>::infinity();
    if (hi <= rule.s_stop || lo >= rule.s_pga) continue;
    if (prof.v[i] < v_sl - 1e-6) {
      info.has_curve = true;
      info.curve_entry_s = std::max(lo, rule.s_stop);
      info.curve_exit_s = std::min(hi, rule.s_pga);
      info.curve_speed = prof.v[i];
    }
  }
  if (!info.has_curve) {
    info.curve_entry_s = rule.s_stop;
    info.curve_exit_s = rule.s_stop;
    double vmin = std::numeric_limits<double>::infinity();
    for (double s = rule.s_stop; s < rule.s_pga; s += 0.5) vmin = std::min(vmin, prof.at(s));
    info.curve_speed = std::min(vmin, v_sl);
  }

  // Run-out speed limited by the comfort envelope of the final leg.
  double run_out = std::max(rule.s_pga - info.curve_exit_s, 0.0);
  info.v_pga = chord_cap_speed(info.curve_speed, prof.at(rule.s_pga + 0.5),
                               std::max(run_out, 0.1), 0.75 * cs.a_max, 1.2);
  double leg3 = run_out / std::max(0.5 * (info.curve_speed + info.v_pga), 0.5);
  info.leg_pga =
      info.has_curve
          ? std::max(info.curve_exit_s - rule.conflict_lo, 0.0) /
                    std::max(info.curve_speed, 0.5) +
                leg3
          : (rule.s_pga - rule.conflict_lo) /
                std::max(0.5 * (info.curve_speed + info.v_pga), 0.5);
  return info;
}

}  // namespace

std::vector<SituationContext> precompute_contexts(const ReferencePath& path,
                                                  const MapRules& rules,
                                                  const ConstraintSet& base) {
  ConstraintSet cs = base;
  cs.v_raw = speed_limit_profile(path, rules.v_sl, cs.a_perp_max);
  cs.v_static = segmentwise_constant(cs.v_raw, path);

  double total = path.total_length;
  double prev_end = 0.0;
  for (const auto& j : rules.junctions) {
    if (!(j.s_stop > 0.0) || !(j.s_stop < j.s_pga) || j.s_pga > total + 1e-6) {
      throw InconsistentRules("junction stop/merge positions out of order");
    }
    if (j.conflict_lo > j.conflict_hi || j.conflict_hi > j.s_pga + 1e-6) {
      throw InconsistentRules("junction conflict window out of order");
    }
    if (j.s_stop < prev_end - 1e-6) {
      throw InconsistentRules("junctions overlap");
    }
    prev_end = j.s_pga;
  }

  std::vector<SituationContext> out;
  double cursor = 0.0;
  bool after_junction = false;
  auto push_free = [&](double lo, double hi) {
    if (hi - lo < 1e-6) return;
    SituationContext ctx;
    ctx.s_begin = lo;
    ctx.s_end = hi;
    ctx.constraints = cs;
    ctx.assumptions.relevant_lanes = after_junction
                                         ? std::vector<std::string>{"ego", "main"}
                                         : std::vector<std::string>{"ego"};
    out.push_back(std::move(ctx));
  };

  for (const auto& j : rules.junctions) {
    // Entry boundary: earliest position from which the merge end is reachable
    // within the prediction horizon at profile speed.
    double lo = j.s_pga;
    double budget = cs.T_pred;
    while (lo > cursor + 1e-9 && budget > 0.0) {
      double step = std::min(0.25, lo - cursor);
      budget -= step / std::max(cs.v_static.at(lo - 0.5 * step), 0.5);
      if (budget < 0.0) break;
      lo -= step;
    }
    lo = std::max(lo, cursor);

    push_free(cursor, lo);
    SituationContext ctx;
    ctx.s_begin = lo;
    ctx.s_end = j.s_pga;
    ctx.constraints = cs;
    ctx.junction = derive_junction_info(j, cs, rules.v_sl);
    out.push_back(std::move(ctx));
    cursor = j.s_pga;
    after_junction = true;
  }
  push_free(cursor, total);
  if (out.empty()) throw InconsistentRules("empty route");
  return out;
}

SituationContext select_and_update_context(const std::vector<SituationContext>& contexts,
                                           const LongitudinalState& ego,
                                           const std::vector<ObjectPrediction>& objects,
                                           double now, const BehaviorOption* prev,
                                           double prev_epoch) {
  if (contexts.empty()) throw NoContext("no precomputed route contexts");
  // Tracking error can put the vehicle marginally outside the route interval.
  const double s_query =
      std::clamp(ego.s, contexts.front().s_begin, contexts.back().s_end);
  const SituationContext* found = nullptr;
  for (const auto& ctx : contexts) {
    bool last = &ctx == &contexts.back();
    if (s_query >= ctx.s_begin - 1e-9 &&
        (s_query < ctx.s_end || (last && s_query <= ctx.s_end + 1e-6))) {
      found = &ctx;
      break;
    }
  }
  if (!found) throw NoContext("ego position outside precomputed route contexts");

  SituationContext ctx = *found;

  // Lead detection: nearest vehicle ahead on the ego corridor. Main-road
  // traffic only counts once the shared corridor begins.
  double merge_anchor = std::numeric_limits<double>::infinity();
  if (ctx.junction) {
    merge_anchor = ctx.junction->rule.conflict_lo;
  } else {
    bool main_relevant =
        std::find(ctx.assumptions.relevant_lanes.begin(), ctx.assumptions.relevant_lanes.end(),
                  "main") != ctx.assumptions.relevant_lanes.end();
    if (main_relevant) merge_anchor = ctx.s_begin;
  }
  const ObjectPrediction* lead = nullptr;
  for (const auto& obj : objects) {
    if (obj.source == ObjectSource::virtual_eos) continue;
    if (obj.s0 < ego.s + 0.5 || obj.s0 > ego.s + 80.0) continue;
    bool on_corridor = obj.lane == "ego" || (obj.lane == "main" && obj.s0 >= merge_anchor);
    if (!on_corridor) continue;
    if (!lead || obj.s0 < lead->s0) lead = &obj;
  }
  if (lead) {
    LeadRestriction lr;
    lr.lead = *lead;
    ctx.constraints.lead = lr;
  }

  if (prev && !prev->targets.empty()) {
    BehaviorOption seed = *prev;
    seed.seeded = true;
    std::vector<TargetState> kept;
    for (TargetState tgt : seed.targets) {
      tgt.t = (prev_epoch + tgt.t) - now;
      // The pins are absolute (s, t) pairs from an earlier epoch, so any
      // tracking offset has to be absorbed within the remaining leg time, at
      // a jerk growing like 1/T^2..1/T^3. Moving pins therefore get dropped
      // well before they drain (the next leg absorbs the offset over a
      // longer window); standstill pins ride to completion, offsets vanish
      // with the speed. Dropping the last pin also retires carried-over
      // stubs that would otherwise win on sheer shortness forever.
      double cut = tgt.v < 0.15 ? 0.12 : 2.0;
      if (tgt.t < cut) continue;
      if (tgt.s < ego.s - 0.5) continue;
      kept.push_back(tgt);
    }
    seed.targets = std::move(kept);
    if (!seed.targets.empty()) ctx.seeded = std::move(seed);
  }
  return ctx;
}

namespace {

struct Interval {
  double lo, hi;
};

// Free crossing windows of the shared corridor within the horizon, relative
// to the current cycle. Window edges created by traffic are event-anchored
// and therefore stable across replanning cycles.
std::vector<Interval> free_windows(const std::vector<ObjectPrediction>& objects,
                                   const JunctionInfo& junction, double horizon) {
  std::vector<Interval> blocked;
  for (const auto& obj : objects) {
    if (obj.lane != "main" || obj.source == ObjectSource::virtual_eos) continue;
    if (obj.v > 0.1) {
      double t_in = (junction.rule.conflict_lo - obj.s0) / obj.v;
      double t_out = (junction.rule.conflict_hi - obj.s0) / obj.v;
      if (t_out < 0.0 || t_in > horizon) continue;
      blocked.push_back({std::max(t_in, 0.0), std::min(t_out, horizon)});
    } else if (obj.s0 > junction.rule.conflict_lo - 2.0 &&
               obj.s0 < junction.rule.conflict_hi + 2.0) {
      blocked.push_back({0.0, horizon});
    }
  }
  std::sort(blocked.begin(), blocked.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const auto& b : blocked) {
    if (!merged.empty() && b.lo <= merged.back().hi + 1e-9) {
      merged.back().hi = std::max(merged.back().hi, b.hi);
    } else {
      merged.push_back(b);
    }
  }
  std::vector<Interval> windows;
  double cursor = 0.0;
  for (const auto& b : merged) {
    if (b.lo - cursor > 1e-9) windows.push_back({cursor, b.lo});
    cursor = std::max(cursor, b.hi);
  }
  if (horizon - cursor > 1e-9) windows.push_back({cursor, horizon});
  return windows;
}

std::vector<double> absolute_grid(double now, double lo_rel, double hi_rel, double step) {
  std::vector<double> out;
  if (hi_rel < lo_rel) return out;
  double first = std::ceil((now + lo_rel) / step - 1e-9) * step;
  for (double t = first; t <= now + hi_rel + 1e-9; t += step) {
    out.push_back(t - now);
  }
  return out;
}

std::vector<double> pick_spread(const std::vector<double>& values, int count) {
  std::vector<double> out;
  if (values.empty() || count <= 0) return out;
  if (static_cast<int>(values.size()) <= count) return values;
  for (int k = 0; k < count; ++k) {
    std::size_t idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * (values.size() - 1) / (count - 1)));
    out.push_back(values[idx]);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Crossing-time proposals per free window. Traffic-bounded edges use the
// margin pattern, horizon-bounded edges fall back to the absolute grid.
std::vector<double> crossing_samples(const Interval& win, bool lo_is_event,
                                     bool hi_is_event, const SamplerConfig& smp,
                                     double now) {
  std::vector<double> out;
  double width = win.hi - win.lo;
  if (width < smp.min_gap) return out;
  double d = smp.gap_margin;
  if (lo_is_event && hi_is_event) {
    int n = std::max(smp.times_per_gap, 1);
    if (n == 1 || width <= 2.0 * d) {
      out.push_back(0.5 * (win.lo + win.hi));
    } else {
      for (int k = 0; k < n; ++k) {
        out.push_back(win.lo + d + k * (width - 2.0 * d) / (n - 1));
      }
    }
    return out;
  }
  double lo = win.lo + (lo_is_event ? d : 0.0);
  double hi = win.hi - (hi_is_event ? d : 0.0);
  out = absolute_grid(now, lo, hi, smp.time_step);
  if (lo_is_event) out.insert(out.begin(), lo);
  if (hi_is_event) out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-6; }),
            out.end());
  return out;
}

std::string option_key(const BehaviorOption& opt) {
  std::string key = std::to_string(static_cast<int>(opt.kind));
  char buf[64];
  for (const auto& tgt : opt.targets) {
    std::snprintf(buf, sizeof(buf), "|%.4f,%.4f,%.4f,%.4f", tgt.s, tgt.v, tgt.a, tgt.t);
    key += buf;
  }
  return key;
}

// Builds the trailing leg of a merge option: curve exit and merge end.
// Returns an empty vector when the leg times collapse.
std::vector<TargetState> merge_leg(const JunctionInfo& jn, double ego_s, double t_pga,
                                   double t_min_start) {
  const YieldJunction& rule = jn.rule;
  std::vector<TargetState> targets;
  double leg3 = jn.has_curve
                    ? (rule.s_pga - jn.curve_exit_s) /
                          std::max(0.5 * (jn.curve_speed + jn.v_pga), 0.5)
                    : 0.0;
  double t_ce = t_pga - leg3;
  if (jn.has_curve && jn.curve_exit_s > ego_s + 0.3 && t_ce > t_min_start + 0.2 &&
      t_ce < t_pga - 0.15) {
    targets.push_back({jn.curve_exit_s, jn.curve_speed, 0.0, t_ce, TargetRole::curve_exit});
  }
  if (t_pga <= t_min_start + 0.2) return {};
  targets.push_back({rule.s_pga, jn.v_pga, 0.0, t_pga, TargetRole::pga});
  return targets;
}

}  // namespace

std::vector<BehaviorOption> generate_behavior_options(
    const SituationContext& ctx, const LongitudinalState& ego,
    const std::vector<ObjectPrediction>& objects, const SamplerConfig& smp,
    double now) {
  std::vector<BehaviorOption> out;
  std::set<std::string> seen;
  auto emit = [&](BehaviorOption opt) {
    auto key = option_key(opt);
    if (!seen.insert(key).second) return;
    out.push_back(std::move(opt));
  };

  // A carried-over plan that still ends at the commit point is an approach
  // prefix; it is re-emitted inside the junction branch, where the merge
  // tail can be attached once it fits the horizon.
  bool seed_deferred = ctx.seeded && !ctx.seeded->targets.empty() &&
                       ctx.junction &&
                       ctx.seeded->targets.back().role == TargetRole::pnr;
  if (ctx.seeded && !ctx.seeded->targets.empty() && !seed_deferred) {
    emit(*ctx.seeded);
  }

  const ConstraintSet& cs = ctx.constraints;
  const double b = std::abs(cs.a_min);
  const bool standstill = ego.v < 0.15;

  if (ctx.junction) {
    const JunctionInfo& jn = *ctx.junction;
    const YieldJunction& rule = jn.rule;
    const bool committed = ego.s + ego.v * ego.v / (2.0 * b) > rule.s_stop + 0.05;
    // Stops aim slightly short of the line so tracking error cannot carry
    // the standstill past it.
    const double stop_line = rule.s_stop - 0.3;

    auto windows = free_windows(objects, jn, cs.T_pred);
    std::vector<double> crossings;
    for (const auto& win : windows) {
      bool lo_ev = win.lo > 1e-9;
      bool hi_ev = win.hi < cs.T_pred - 1e-9;
      auto samples = crossing_samples(win, lo_ev, hi_ev, smp, now);
      crossings.insert(crossings.end(), samples.begin(), samples.end());
    }

    const bool lead_follow = cs.lead.has_value() && !standstill && !committed;

    // Time from the commit point to the merge end: reduced-speed stretch
    // plus the run-out. Shared by every merge-shaped candidate.
    auto tail_times = [&](double v1, double s_pnr) {
      double leg3 = jn.has_curve
                        ? (rule.s_pga - jn.curve_exit_s) /
                              std::max(0.5 * (jn.curve_speed + jn.v_pga), 0.5)
                        : 0.0;
      double leg2 = (jn.curve_exit_s - s_pnr) /
                    std::max(0.5 * (v1 + jn.curve_speed), 0.5);
      return std::pair<double, double>(leg2, leg3);
    };

    if (seed_deferred) {
      BehaviorOption seed = *ctx.seeded;
      const TargetState pin = seed.targets.back();
      auto [leg2, leg3] = tail_times(pin.v, pin.s);
      double t_pga = pin.t + leg2 + leg3;
      if (t_pga <= cs.T_pred + 0.25) {
        auto tail = merge_leg(jn, ego.s, t_pga, pin.t);
        if (!tail.empty()) {
          seed.targets.insert(seed.targets.end(), tail.begin(), tail.end());
          seed.label = format_label("merge v%.1f g%.2f", pin.v, now + t_pga);
        }
      }
      emit(std::move(seed));
    }

    if (!lead_follow) {
      // Direct merge options over the commit-speed x crossing-time grid. The
      // post-commit leg descends to the curve speed inside the reduced-speed
      // region, so commit speeds above it can never clear the profile; the
      // exact cap enters the grid as the constant-speed member.
      double v_cap = cs.v_static.at(rule.s_stop - 0.01);
      if (jn.has_curve) v_cap = std::min(v_cap, jn.curve_speed);
      std::vector<double> v_grid;
      for (double v1 = smp.v_min; v1 < v_cap - 1e-6; v1 += smp.v_step) {
        v_grid.push_back(v1);
      }
      if (v_cap >= smp.v_min) v_grid.push_back(v_cap);
      for (double tau : crossings) {
        double t_pga = tau + jn.leg_pga;
        if (t_pga > cs.T_pred + 0.25) continue;
        // Past the stoppable point of a commit speed its pin no longer
        // applies and every such grid member collapses to the same bare
        // tail; one of those per crossing is enough.
        bool bare_tail_done = false;
        for (double v1 : v_grid) {
          double s_pnr = compute_pnr(v1, cs.a_min, rule.s_stop);
          auto [leg2, leg3] = tail_times(v1, s_pnr);
          double t_pnr = t_pga - leg3 - leg2;

          BehaviorOption opt;
          opt.kind = BehaviorKind::merge_dynamic;
          opt.importance = 2;
          double last_t = 0.0;
          bool with_pin = s_pnr > ego.s + 0.3 && t_pnr > 0.2;
          if (with_pin) {
            opt.targets.push_back({s_pnr, v1, 0.0, t_pnr, TargetRole::pnr});
            last_t = t_pnr;
          } else {
            if (bare_tail_done) continue;
            bare_tail_done = true;
          }
          auto tail = merge_leg(jn, ego.s, t_pga, last_t);
          if (tail.empty()) continue;
          opt.targets.insert(opt.targets.end(), tail.begin(), tail.end());
          opt.label = with_pin
                          ? format_label("merge v%.1f g%.2f", v1, now + t_pga)
                          : format_label("merge g%.2f %.0f", now + t_pga, 0.0);
          emit(std::move(opt));
        }
      }

      // Chord-timed member per commit speed. The crossing grid is aligned to
      // absolute time, so its best sample sits up to half a step off the
      // kinematically natural arrival and the approach leg eats the slack as
      // extra swing; this variant keeps the minimum-swing timing in the pool
      // at every epoch.
      for (double v1 : v_grid) {
        double s_pnr = compute_pnr(v1, cs.a_min, rule.s_stop);
        if (s_pnr <= ego.s + 0.3) continue;
        double t1 = (s_pnr - ego.s) / std::max(0.5 * (ego.v + v1), 0.5);
        if (t1 < 0.35) continue;
        auto [leg2, leg3] = tail_times(v1, s_pnr);
        double t_pga = t1 + leg2 + leg3;
        if (t_pga > cs.T_pred + 0.25) continue;
        BehaviorOption opt;
        opt.kind = BehaviorKind::merge_dynamic;
        opt.importance = 2;
        opt.targets.push_back({s_pnr, v1, 0.0, t1, TargetRole::pnr});
        auto tail = merge_leg(jn, ego.s, t_pga, t1);
        if (tail.empty()) continue;
        opt.targets.insert(opt.targets.end(), tail.begin(), tail.end());
        opt.label = format_label("merge v%.1f g%.2f", v1, now + t_pga);
        emit(std::move(opt));
      }

      // Approach pacing while the full merge is still beyond the horizon:
      // plan its first leg alone, settling to the commit speed at the
      // stoppable point. The carried-over seed grows the tail as soon as it
      // fits, so the profile never has to be re-timed at the handover.
      {
        double s_pnr = compute_pnr(v_cap, cs.a_min, rule.s_stop);
        if (s_pnr > ego.s + 0.3) {
          double t1 = (s_pnr - ego.s) / std::max(0.5 * (ego.v + v_cap), 0.5);
          auto [leg2, leg3] = tail_times(v_cap, s_pnr);
          if (t1 >= 0.35 && t1 + leg2 + leg3 > cs.T_pred + 0.25) {
            BehaviorOption opt;
            opt.kind = BehaviorKind::merge_dynamic;
            opt.importance = 2;
            opt.targets = {{s_pnr, v_cap, 0.0, t1, TargetRole::pnr}};
            opt.label = format_label("approach v%.1f p%.2f", v_cap, now + t1);
            emit(std::move(opt));
          }
        }
      }

      // Relative-timed continuation at chord speeds. The crossing grid is
      // anchored to absolute time, so the sample an active maneuver was
      // built on eventually slides past "now"; this candidate keeps the
      // nominal run to the merge end available at every epoch. The profile
      // transition has to finish by the curve entry, so the deceleration leg
      // aims there, with the reduced-speed stretch ridden at its bound.
      {
        BehaviorOption opt;
        opt.kind = BehaviorKind::merge_dynamic;
        opt.importance = 2;
        double t_acc = 0.0;
        double s_from = ego.s;
        double v_from = std::max(ego.v, 0.8);
        if (jn.has_curve && jn.curve_entry_s > ego.s + 0.3) {
          double t_en = (jn.curve_entry_s - ego.s) /
                        std::max(0.5 * (v_from + jn.curve_speed), 0.5);
          if (t_en >= 1.4) {
            opt.targets.push_back(
                {jn.curve_entry_s, jn.curve_speed, 0.0, t_en, TargetRole::plain});
            t_acc = t_en;
            s_from = jn.curve_entry_s;
            v_from = jn.curve_speed;
          }
        }
        if (jn.has_curve && jn.curve_exit_s > s_from + 0.3 &&
            jn.curve_exit_s > ego.s + 0.3) {
          double t_leg = (jn.curve_exit_s - s_from) /
                         std::max(0.5 * (v_from + jn.curve_speed), 0.5);
          // Pinning speed and zero accel over a shrinking window costs jerk
          // like 1/T^2; fold the leg into the run-out well before that bites.
          if (t_leg >= 1.4) {
            opt.targets.push_back({jn.curve_exit_s, jn.curve_speed, 0.0,
                                   t_acc + t_leg, TargetRole::curve_exit});
            t_acc += t_leg;
            s_from = jn.curve_exit_s;
            v_from = jn.curve_speed;
          }
        }
        double run = rule.s_pga - s_from;
        if (run > 0.02) {
          // End speed limited by the comfortable reach from here, not pinned:
          // a lagging start would otherwise demand a flare right at the end.
          // When the leg starts inside the reduced stretch it also must not
          // rise early, so it holds the curve speed to the merge end; the
          // pick-up happens past it.
          double v_goal = jn.v_pga;
          if (jn.has_curve && s_from < jn.curve_exit_s - 1e-6) {
            v_goal = std::min(v_goal, jn.curve_speed);
          }
          double v_end = std::min(
              v_goal, chord_cap_speed(v_from, v_goal, run, 0.75 * cs.a_max, 1.2));
          double t_pga = t_acc + run / std::max(0.5 * (v_from + v_end), 0.5);
          if (t_pga - t_acc < 1.6) {
            // The closing leg collapses together with the distance to the
            // merge end; carry the roll past it instead so the leg keeps a
            // workable horizon. Slightly stretches the exposure interval,
            // which only errs cautious.
            double thru = rule.s_pga + std::max(1.6 * v_goal, 1.5) - s_from;
            v_end = std::min(v_goal, chord_cap_speed(v_from, v_goal, thru,
                                                     0.75 * cs.a_max, 1.2));
            t_pga = t_acc + thru / std::max(0.5 * (v_from + v_end), 0.5);
            run = thru;
          }
          if (t_pga <= cs.T_pred + 0.25 && t_pga > 0.3) {
            opt.targets.push_back(
                {s_from + run, v_end, 0.0, t_pga, TargetRole::pga});
            opt.label = format_label("continue g%.2f %.0f", now + t_pga, 0.0);
            emit(std::move(opt));
          }
        }
      }

      // From (near) standstill at the line the commit-speed grid is out of
      // reach; ramp straight to the conflict entry at curve speed instead.
      double d_cl = rule.conflict_lo - ego.s;
      if (ego.v < 1.2 && !committed && jn.has_curve && d_cl > 2.0) {
        double t1 = 2.0 * d_cl / std::max(ego.v + jn.curve_speed, 0.5);
        double t_ce = t1 + std::max(jn.curve_exit_s - rule.conflict_lo, 0.0) /
                               std::max(jn.curve_speed, 0.5);
        double leg3 = (rule.s_pga - jn.curve_exit_s) /
                      std::max(0.5 * (jn.curve_speed + jn.v_pga), 0.5);
        double t_pga = t_ce + leg3;
        if (t_pga <= cs.T_pred + 0.25) {
          BehaviorOption opt;
          opt.kind = BehaviorKind::merge_dynamic;
          opt.importance = 2;
          opt.targets = {{rule.conflict_lo, jn.curve_speed, 0.0, t1, TargetRole::plain}};
          if (jn.curve_exit_s > rule.conflict_lo + 0.3 && t_ce < t_pga - 0.15) {
            opt.targets.push_back(
                {jn.curve_exit_s, jn.curve_speed, 0.0, t_ce, TargetRole::curve_exit});
          }
          opt.targets.push_back({rule.s_pga, jn.v_pga, 0.0, t_pga, TargetRole::pga});
          opt.label = format_label("launch g%.2f %.0f", now + t_pga, 0.0);
          emit(std::move(opt));
        }
      }
    } else {
      // A lead on the approach corridor: match it first, then merge or stop.
      const LeadRestriction& lr = *cs.lead;
      auto t1_grid = absolute_grid(now, 0.8, std::min(6.0, cs.T_pred - 2.0), smp.time_step);
      for (double t1 : pick_spread(t1_grid, smp.follow_t1_samples)) {
        double v_lead = lr.lead.speed_at(t1);
        double s1 = lr.boundary_at(t1);
        if (s1 < ego.s + 0.5) continue;
        TargetState follow{s1, v_lead, 0.0, t1, TargetRole::plain};

        int merges = 0;
        for (double tau : crossings) {
          double t_pga = tau + jn.leg_pga;
          if (t_pga <= t1 + 0.8 || t_pga > cs.T_pred + 0.25) continue;
          if (merges >= smp.follow_t2_samples) break;
          BehaviorOption opt;
          opt.kind = BehaviorKind::follow_then_merge;
          opt.importance = 2;
          opt.targets.push_back(follow);
          double v1 = std::min(v_lead, cs.v_static.at(rule.s_stop - 0.01));
          if (jn.has_curve) v1 = std::min(v1, jn.curve_speed);
          v1 = std::max(v1, smp.v_min);
          double s_pnr = compute_pnr(v1, cs.a_min, rule.s_stop);
          auto [leg2, leg3] = tail_times(v1, s_pnr);
          double t_pnr = t_pga - leg3 - leg2;
          if (s_pnr > s1 + 0.3 && t_pnr > t1 + 0.2) {
            opt.targets.push_back({s_pnr, v1, 0.0, t_pnr, TargetRole::pnr});
          }
          auto tail = merge_leg(jn, ego.s, t_pga, opt.targets.back().t);
          if (tail.empty()) continue;
          opt.targets.insert(opt.targets.end(), tail.begin(), tail.end());
          opt.label = format_label("follow-merge t%.2f g%.2f", now + t1, now + t_pga);
          emit(std::move(opt));
          ++merges;
        }

        // Stop behind the line (or behind where the lead ends up).
        double stop_pos = std::min(stop_line,
                                   lr.lead.mean_at(cs.T_pred) - (lr.s_plus0 + 0.5));
        double d1 = stop_pos - s1;
        if (d1 > 0.3) {
          double v_ref = std::max(v_lead, 0.5);
          auto t2_grid = absolute_grid(now, t1 + 1.55 * d1 / v_ref,
                                       t1 + 2.45 * d1 / v_ref, smp.time_step);
          auto picks = pick_spread(t2_grid, smp.follow_t2_samples);
          if (picks.empty()) picks.push_back(t1 + std::max(2.0 * d1 / v_ref, 0.8));
          for (double t2 : picks) {
            BehaviorOption opt;
            opt.kind = BehaviorKind::follow_then_stop;
            opt.importance = 1;
            opt.targets = {follow, {stop_pos, 0.0, 0.0, t2, TargetRole::plain}};
            opt.label = format_label("follow-stop t%.2f e%.2f", now + t1, now + t2);
            emit(std::move(opt));
          }
        }
      }
    }

    // Gentle stop at the line.
    if (!committed) {
      BehaviorOption hold;
      hold.kind = BehaviorKind::gentle_stop;
      hold.importance = 1;
      if (standstill) {
        hold.targets = {{ego.s + 0.5 * ego.v, 0.0, 0.0, 1.0, TargetRole::plain}};
        hold.label = "hold";
        emit(std::move(hold));
      } else {
        double delta = stop_line - ego.s;
        if (delta > 0.2) {
          double v0e = std::max(ego.v, 0.3);
          auto grid = absolute_grid(now, 1.55 * delta / v0e, 2.45 * delta / v0e,
                                    smp.time_step);
          auto picks = pick_spread(grid, smp.stop_time_samples);
          if (picks.empty()) picks.push_back(2.0 * delta / v0e);
          for (double tf : picks) {
            BehaviorOption opt;
            opt.kind = BehaviorKind::gentle_stop;
            opt.importance = 1;
            opt.targets = {{stop_line, 0.0, 0.0, tf, TargetRole::plain}};
            opt.label = format_label("stop e%.2f %.0f", now + tf, 0.0);
            emit(std::move(opt));
          }
        } else {
          // Creeping at the line: settle within the margin that remains,
          // stretching the stop distance when the remaining gap would force
          // an uncomfortable flare.
          double room = rule.s_stop - 0.02 - ego.s;
          if (room > 0.04) {
            // Flooring the distance at 0.6 s worth of travel keeps the stop
            // time from collapsing, which would cost jerk like v/T^2.
            double de = std::max({delta, ego.v * ego.v / 2.8, ego.v * 0.6});
            de = std::clamp(de, 0.05, room);
            double tf = 2.0 * de / std::max(ego.v, 0.2);
            BehaviorOption opt;
            opt.kind = BehaviorKind::gentle_stop;
            opt.importance = 1;
            opt.targets = {{ego.s + de, 0.0, 0.0, tf, TargetRole::plain}};
            opt.label = "settle";
            emit(std::move(opt));
          }
        }
      }
    }

    // Fail-safe stop. Before commitment it must end at or before the stop
    // line; a single comfort profile when it brakes gently enough, otherwise
    // a jerk ramp onto the full-braking parabola.
    {
      BehaviorOption opt;
      opt.kind = BehaviorKind::fail_safe;
      opt.importance = 0;
      if (standstill) {
        opt.targets = {{ego.s + 0.5 * ego.v, 0.0, 0.0, 1.0, TargetRole::plain}};
        opt.label = "fs-hold";
      } else {
        double delta = committed ? ego.v * ego.v / (2.0 * 2.0)
                                 : std::max({stop_line - ego.s, ego.v * 0.25, 0.05});
        double stop_s = ego.s + delta;
        if (!committed && stop_s > rule.s_stop - 0.02 && ego.s < rule.s_stop - 0.06) {
          stop_s = rule.s_stop - 0.02;
          delta = stop_s - ego.s;
        }
        if (0.75 * ego.v * ego.v / delta <= 0.98 * b) {
          double tf = 2.0 * delta / std::max(ego.v, 0.2);
          opt.targets = {{stop_s, 0.0, 0.0, tf, TargetRole::plain}};
          opt.label = "fs-comfort";
        } else {
          const double jerk_ramp = 20.0;
          double t1 = std::max((ego.a - cs.a_min) / jerk_ramp, 0.02);
          double v1 = ego.v + ego.a * t1 - 0.5 * jerk_ramp * t1 * t1;
          double s1 = ego.s + ego.v * t1 + 0.5 * ego.a * t1 * t1 -
                      jerk_ramp * t1 * t1 * t1 / 6.0;
          if (v1 <= 0.05) {
            double tf = 2.0 * delta / std::max(ego.v, 0.2);
            opt.targets = {{stop_s, 0.0, 0.0, tf, TargetRole::plain}};
            opt.label = "fs-comfort";
          } else {
            double t2 = t1 + v1 / b;
            double s2 = s1 + v1 * v1 / (2.0 * b);
            opt.targets = {{s1, v1, cs.a_min, t1, TargetRole::plain},
                           {s2, 0.0, cs.a_min, t2, TargetRole::plain}};
            opt.label = "fs-brake";
          }
        }
      }
      emit(std::move(opt));
    }
  } else {
    // Free-driving context: keep to the profile toward the context boundary.
    double s_t = ctx.s_end;
    double v_t = std::min(cs.v_static.at(std::max(s_t - 0.1, 0.0)),
                          cs.v_static.at(s_t + 0.1));
    if (cs.lead) {
      const LeadRestriction& lr = *cs.lead;
      auto t1_grid = absolute_grid(now, 1.0, std::min(8.0, cs.T_pred), smp.time_step);
      for (double t1 : pick_spread(t1_grid, smp.follow_t1_samples)) {
        double s1 = lr.boundary_at(t1);
        if (s1 < ego.s + 0.5) continue;
        BehaviorOption opt;
        opt.kind = BehaviorKind::follow_then_merge;
        opt.importance = 2;
        opt.targets = {{s1, lr.lead.speed_at(t1), 0.0, t1, TargetRole::plain}};
        opt.label = format_label("follow t%.2f %.0f", now + t1, 0.0);
        emit(std::move(opt));
      }
    } else {
      double dist = s_t - ego.s;
      if (dist > std::max(0.5, 0.8 * ego.v)) {
        // Arrivals faster than nominal need a mid-segment speed above the
        // endpoint speeds, which the profile bound rejects when already at
        // the limit; sample from nominal upward.
        // Boundary speed limited to the comfortable reach from here, so the
        // final approach to the context edge never demands a flare.
        double v_te = std::min(v_t, chord_cap_speed(ego.v, v_t, dist,
                                                    0.75 * cs.a_max, 1.2));
        double t_nom = dist / std::max(0.5 * (ego.v + v_te), 0.5);
        if (t_nom < 2.5) {
          // Too close to both finish the speed change and settle the
          // acceleration; chasing the boundary speed from here steepens
          // every replan. Ramp the current acceleration out over the
          // remaining run and leave the rest to the next segment.
          double a0 = std::clamp(ego.a, cs.a_min, cs.a_max);
          double tf;
          if (std::abs(a0) > 1e-3) {
            // Pin the endpoint of a linear ramp-down of a0 over the run: with
            // s, v, a all taken from that profile the pinned boundary state is
            // reachable at constant jerk a0/tf, where a zero-accel pin on a
            // constant-a0 extrapolation forces an accel overshoot instead.
            double disc = ego.v * ego.v + (4.0 / 3.0) * a0 * dist;
            tf = disc > 0.0
                     ? (std::sqrt(disc) - ego.v) / ((2.0 / 3.0) * a0)
                     : dist / std::max(ego.v, 0.5);
          } else {
            tf = dist / std::max(ego.v, 0.5);
          }
          tf = std::clamp(tf, 0.3, cs.T_pred);
          double v_roll = std::clamp(ego.v + 0.5 * a0 * tf, 0.3, v_t);
          BehaviorOption opt;
          opt.kind = BehaviorKind::merge_dynamic;
          opt.importance = 2;
          opt.targets = {{s_t, v_roll, 0.0, tf, TargetRole::plain}};
          opt.label = format_label("cruise e%.2f %.0f", now + tf, 0.0);
          emit(std::move(opt));
        } else {
          auto grid = absolute_grid(now, t_nom, std::max(t_nom + 1.0, 1.35 * t_nom),
                                    smp.time_step);
          auto picks = pick_spread(grid, smp.cruise_time_samples);
          // The grid is absolute-time aligned, so close to the boundary its
          // first sample can overshoot the nominal time by a whole step; the
          // relative nominal pick keeps pace regardless of epoch phase.
          picks.push_back(t_nom);
          for (double tf : picks) {
            BehaviorOption opt;
            opt.kind = BehaviorKind::merge_dynamic;
            opt.importance = 2;
            opt.targets = {{s_t, v_te, 0.0, tf, TargetRole::plain}};
            opt.label = format_label("cruise e%.2f %.0f", now + tf, 0.0);
            emit(std::move(opt));
          }
        }
      } else {
        BehaviorOption opt;
        opt.kind = BehaviorKind::merge_dynamic;
        opt.importance = 2;
        double v_ref = std::max(0.5 * (ego.v + v_t), 0.3);
        opt.targets = {{ego.s + v_ref * 2.0, v_t, 0.0, 2.0, TargetRole::plain}};
        opt.label = "cruise-on";
        emit(std::move(opt));
      }
    }

    BehaviorOption fs;
    fs.kind = BehaviorKind::fail_safe;
    fs.importance = 0;
    if (standstill) {
      fs.targets = {{ego.s + 0.5 * ego.v, 0.0, 0.0, 1.0, TargetRole::plain}};
      fs.label = "fs-hold";
    } else {
      double tf = std::max(ego.v / 1.33, 0.8);
      fs.targets = {{ego.s + 0.5 * ego.v * tf, 0.0, 0.0, tf, TargetRole::plain}};
      fs.label = "fs-comfort";
    }
    emit(std::move(fs));
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const BehaviorOption& a, const BehaviorOption& b) {
                     return a.importance > b.importance;
                   });

  if (static_cast<int>(out.size()) > smp.max_options) {
    std::vector<BehaviorOption> trimmed;
    int high = 0;
    for (const auto& opt : out) {
      if (opt.importance < 2 || high < smp.max_options - 8) {
        trimmed.push_back(opt);
        if (opt.importance == 2) ++high;
      }
    }
    out = std::move(trimmed);
  }
  return out;
}

}  // namespace camp
