#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "camp/trajectory.hpp"

namespace camp {

class MissingAnnotation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Perception reliability model: detection quality is Beta(a, b) distributed
// and perception counts as reliable above the threshold alpha.
struct ReliabilityEstimate {
  double beta_a = 8.0;
  double beta_b = 2.0;
  double alpha = 0.5;
};

// P(quality >= alpha) under the Beta(a, b) model.
double perception_reliability(const ReliabilityEstimate& est);

// Regularized incomplete beta I_x(a, b), exposed for tests.
double regularized_incomplete_beta(double a, double b, double x);

enum class ObjectSource { ego, external, virtual_eos };

// Constant-velocity 1D prediction with linearly growing position uncertainty,
// expressed in the planning (ego path) coordinate.
struct ObjectPrediction {
  std::string id;
  std::string lane;
  double s0 = 0.0;          // mean position at prediction start
  double v = 0.0;           // predicted speed (constant over the horizon)
  double sigma0 = 0.5;      // position std dev at prediction start
  double sigma_rate = 0.3;  // std dev growth per second
  double horizon = 10.0;
  ObjectSource source = ObjectSource::ego;

  double mean_at(double t) const { return s0 + v * t; }
  double speed_at(double) const { return v; }
  double sigma_at(double t) const { return sigma0 + sigma_rate * t; }
};

struct RiskConfig {
  double s_minus0 = 2.0;   // base rear safety distance
  double s_plus0 = 2.0;    // base front safety distance
  double headway = 1.0;    // velocity-dependent part of both margins, s
  double time_step = 0.1;  // scan step over the passageway window

  // Virtual object spawned at the end of sight when the approach is clear.
  bool eos_enabled = true;
  double eos_position = 0.0;  // planning coordinate of the end of sight
  double eos_speed = 8.33;
  double eos_sigma0 = 0.5;
  double eos_sigma_rate = 0.3;
  // Approach segment checked for real occupancy before spawning the virtual
  // object: [eos_position, eos_clear_until].
  double eos_clear_until = 0.0;
};

// Probability that the object's predicted position at time t lies inside the
// ego safety interval [s_ego - s_minus, s_ego + s_plus]. Margins grow with
// the closing component of the relative speed.
double interval_violation_probability(double ego_s, double ego_v,
                                      const ObjectPrediction& obj, double t,
                                      const RiskConfig& cfg);

// Worst interval violation probability for one object over the passageway
// window [t_pnr, t_pga] of the trajectory, scanned at cfg.time_step.
double object_interval_risk(const LongitudinalTrajectory& traj,
                            const ObjectPrediction& obj, const RiskConfig& cfg);

// Combined risk (1 - p_rel) + p_rel * p_N where p_N folds the per-object
// risks together as p_{i+1} = p_i + (1 - p_i) * p_tilde_{i+1}. An empty
// passageway (t_pnr == t_pga) contributes exactly zero, so fully covered
// trajectories under p_rel = 1 return exactly 0.
double aggregate_risk(const LongitudinalTrajectory& traj,
                      const std::vector<ObjectPrediction>& objects,
                      const RiskConfig& cfg, double p_rel);

// Virtual vehicle entering at the end of sight at eos_speed, unless a real
// object already occupies the approach segment.
std::optional<ObjectPrediction> make_virtual_eos_object(
    const RiskConfig& cfg, const std::vector<ObjectPrediction>& objects);

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace camp
