#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace camp {

struct LongitudinalState {
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
};

class NonpositiveDuration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One quintic polynomial piece s(t) = sum c_k t^k on t in [0, duration].
// A quintic is the unique interpolant of two full boundary states and the
// minimizer of the squared-jerk integral between them.
struct TrajectorySegment {
  std::array<double, 6> coeff{};
  double duration = 0.0;

  double position(double t) const;
  double velocity(double t) const;
  double acceleration(double t) const;
  double jerk(double t) const;

  LongitudinalState state_at(double t) const;
  LongitudinalState end_state() const { return state_at(duration); }

  // Integral of jerk^2/2 over the segment, in closed form.
  double jerk_cost() const;
  // Largest |jerk| on [0, duration] (jerk is quadratic in t).
  double max_abs_jerk() const;
};

// Solves the fixed-endpoint minimum-jerk problem between two full states.
// Throws NonpositiveDuration for dt <= 0.
TrajectorySegment solve_min_jerk_segment(const LongitudinalState& x0,
                                         const LongitudinalState& xf, double dt);

// Piecewise-quintic longitudinal plan. Segment k spans
// [start_time_k, start_time_k + duration_k); times are relative to plan start.
struct LongitudinalTrajectory {
  std::vector<TrajectorySegment> segments;
  // Passageway annotations: commitment time and guaranteed-arrival time.
  // Equal values mean the trajectory never leaves the safe set.
  std::optional<double> t_pnr;
  std::optional<double> t_pga;

  double duration() const;
  // Evaluation beyond the last segment extends with constant velocity.
  LongitudinalState state_at(double t) const;
  double max_abs_jerk() const;
  bool empty() const { return segments.empty(); }
};

}  // namespace camp
