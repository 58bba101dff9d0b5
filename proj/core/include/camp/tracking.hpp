#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "camp/geometry.hpp"
#include "camp/trajectory.hpp"

namespace camp {

class SolverStall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double v = 0.0;
  double a = 0.0;
  double steer = 0.0;
};

struct VehicleParams {
  double wheelbase = 2.7;
  double v_char = 20.0;  // speed-dependent understeer falloff
  double steer_max = 0.6;
  double length = 4.6;
  double width = 1.8;
};

// One control sample: longitudinal jerk and steering rate, held over dt.
using ControlPair = std::array<double, 2>;

struct TrackerConfig {
  int horizon_steps = 60;
  double dt = 0.05;
  double w_s = 1.0;
  double w_d = 5.0;
  double w_phi = 2.0;
  double w_v = 1.0;
  double w_a = 0.2;
  double r_jerk = 0.1;
  double r_steer_rate = 10.0;
  double rho_aperp = 250.0;
  double rho_steer = 200.0;
  double rho_vneg = 400.0;
  double a_perp_max = 1.45;
  double u_jerk_max = 30.0;
  double u_steer_rate_max = 0.7;
  int max_iters = 60;
  int max_backtracks = 30;
  double step_tol = 1e-7;
};

struct TrackerSolution {
  std::vector<ControlPair> controls;
  double cost = 0.0;
  int iterations = 0;
};

// Kinematic single-track step with speed-dependent yaw-rate reduction,
// integrated with RK4. Steering angle and non-negative speed are clamped.
VehicleState bicycle_step(const VehicleState& x, const VehicleParams& p, double u_jerk,
                          double u_steer_rate, double dt);

double lateral_acceleration(const VehicleState& x, const VehicleParams& p);

// Follows a planned longitudinal trajectory along the reference path with
// projected gradient descent; gradients come from the discrete adjoint of
// the RK4 rollout, so they match the rollout cost to machine precision.
class Tracker {
 public:
  Tracker(const ReferencePath& path, const VehicleParams& params, const TrackerConfig& cfg);

  // plan_age: time already elapsed on the plan when x0 was sampled.
  TrackerSolution solve(const VehicleState& x0, const LongitudinalTrajectory& plan,
                        double plan_age);

  // Rollout cost and its exact gradient for a given control sequence.
  double cost_and_gradient(const VehicleState& x0, const LongitudinalTrajectory& plan,
                           double plan_age, const std::vector<ControlPair>& controls,
                           std::vector<ControlPair>* gradient) const;

  void reset();

 private:
  const ReferencePath& path_;
  VehicleParams params_;
  TrackerConfig cfg_;
  std::vector<ControlPair> warm_;
  bool has_warm_ = false;
};

}  // namespace camp
