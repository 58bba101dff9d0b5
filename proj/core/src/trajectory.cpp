#include "camp/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace camp {

double TrajectorySegment::position(double t) const {
  const auto& c = coeff;
  return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
}

double TrajectorySegment::velocity(double t) const {
  const auto& c = coeff;
  return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])));
}

double TrajectorySegment::acceleration(double t) const {
  const auto& c = coeff;
  return 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]));
}

double TrajectorySegment::jerk(double t) const {
  const auto& c = coeff;
  return 6 * c[3] + t * (24 * c[4] + t * 60 * c[5]);
}

LongitudinalState TrajectorySegment::state_at(double t) const {
  return {position(t), velocity(t), acceleration(t)};
}

double TrajectorySegment::jerk_cost() const {
  // jerk(t) = j0 + j1 t + j2 t^2; integrate jerk^2/2 analytically.
  const double j0 = 6 * coeff[3];
  const double j1 = 24 * coeff[4];
  const double j2 = 60 * coeff[5];
  const double T = duration;
  const double T2 = T * T;
  const double T3 = T2 * T;
  const double T4 = T3 * T;
  const double T5 = T4 * T;
  const double integral = j0 * j0 * T + j0 * j1 * T2 +
                          (j1 * j1 / 3.0 + 2.0 * j0 * j2 / 3.0) * T3 +
                          (j1 * j2 / 2.0) * T4 + (j2 * j2 / 5.0) * T5;
  return 0.5 * integral;
}

double TrajectorySegment::max_abs_jerk() const {
  const double j1 = 24 * coeff[4];
  const double j2 = 60 * coeff[5];
  double peak = std::max(std::abs(jerk(0.0)), std::abs(jerk(duration)));
  if (std::abs(j2) > 1e-12) {
    const double t_ext = -j1 / (2.0 * j2);
    if (t_ext > 0.0 && t_ext < duration) {
      peak = std::max(peak, std::abs(jerk(t_ext)));
    }
  }
  return peak;
}

TrajectorySegment solve_min_jerk_segment(const LongitudinalState& x0,
                                         const LongitudinalState& xf, double dt) {
  if (!(dt > 0.0)) throw NonpositiveDuration("segment duration must be positive");

  TrajectorySegment seg;
  seg.duration = dt;
  seg.coeff[0] = x0.s;
  seg.coeff[1] = x0.v;
  seg.coeff[2] = 0.5 * x0.a;

  // Residual boundary conditions after the free ballistic part.
  const double T = dt;
  const double T2 = T * T;
  const double T3 = T2 * T;
  const double ds = xf.s - (x0.s + x0.v * T + 0.5 * x0.a * T2);
  const double dv = xf.v - (x0.v + x0.a * T);
  const double da = xf.a - x0.a;

  // Closed-form inverse of the 3x3 boundary matrix for [c3 c4 c5].
  seg.coeff[3] = (10.0 * ds - 4.0 * dv * T + 0.5 * da * T2) / T3;
  seg.coeff[4] = (-15.0 * ds + 7.0 * dv * T - da * T2) / (T3 * T);
  seg.coeff[5] = (6.0 * ds - 3.0 * dv * T + 0.5 * da * T2) / (T3 * T2);
  return seg;
}

double LongitudinalTrajectory::duration() const {
  double total = 0.0;
  for (const auto& seg : segments) total += seg.duration;
  return total;
}

LongitudinalState LongitudinalTrajectory::state_at(double t) const {
  double offset = 0.0;
  for (size_t i = 0; i < segments.size(); ++i) {
    const bool last = i + 1 == segments.size();
    if (t <= offset + segments[i].duration || last) {
      const double local = t - offset;
      if (last && local > segments[i].duration) {
        // Constant-velocity extension past the planned end.
        const LongitudinalState e = segments[i].end_state();
        return {e.s + e.v * (local - segments[i].duration), e.v, 0.0};
      }
      return segments[i].state_at(std::max(0.0, local));
    }
    offset += segments[i].duration;
  }
  return {};
}

double LongitudinalTrajectory::max_abs_jerk() const {
  double peak = 0.0;
  for (const auto& seg : segments) peak = std::max(peak, seg.max_abs_jerk());
  return peak;
}

}  // namespace camp
