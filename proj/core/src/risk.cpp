#include "camp/risk.hpp"

#include <algorithm>
#include <cmath>

namespace camp {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double perception_reliability(const ReliabilityEstimate& est) {
  return 1.0 - regularized_incomplete_beta(est.beta_a, est.beta_b, est.alpha);
}

double interval_violation_probability(double ego_s, double ego_v,
                                      const ObjectPrediction& obj, double t,
                                      const RiskConfig& cfg) {
  const double mu = obj.mean_at(t);
  const double sigma = std::max(1e-9, obj.sigma_at(t));
  const double v_obj = obj.speed_at(t);
  const double s_minus = cfg.s_minus0 + cfg.headway * std::max(0.0, v_obj - ego_v);
  const double s_plus = cfg.s_plus0 + cfg.headway * std::max(0.0, ego_v - v_obj);
  return normal_cdf((ego_s + s_plus - mu) / sigma) -
         normal_cdf((ego_s - s_minus - mu) / sigma);
}

double object_interval_risk(const LongitudinalTrajectory& traj,
                            const ObjectPrediction& obj, const RiskConfig& cfg) {
  if (!traj.t_pnr.has_value() || !traj.t_pga.has_value()) {
    throw MissingAnnotation("trajectory lacks passageway annotations");
  }
  const double t0 = *traj.t_pnr;
  const double t1 = *traj.t_pga;
  if (!(t1 > t0)) return 0.0;  // empty passageway: never exposed

  double worst = 0.0;
  const double step = std::max(1e-4, cfg.time_step);
  double t = t0;
  while (true) {
    const LongitudinalState x = traj.state_at(t);
    worst = std::max(worst, interval_violation_probability(x.s, x.v, obj, t, cfg));
    if (t >= t1) break;
    t = std::min(t1, t + step);
  }
  return worst;
}

double aggregate_risk(const LongitudinalTrajectory& traj,
                      const std::vector<ObjectPrediction>& objects,
                      const RiskConfig& cfg, double p_rel) {
  double p = 0.0;
  for (const ObjectPrediction& obj : objects) {
    const double pi = object_interval_risk(traj, obj, cfg);
    p = p + (1.0 - p) * pi;
  }
  const double risk = (1.0 - p_rel) + p_rel * p;
  return std::clamp(risk, 0.0, 1.0);
}

std::optional<ObjectPrediction> make_virtual_eos_object(
    const RiskConfig& cfg, const std::vector<ObjectPrediction>& objects) {
  if (!cfg.eos_enabled) return std::nullopt;
  for (const ObjectPrediction& obj : objects) {
    if (obj.source == ObjectSource::virtual_eos) continue;
    if (obj.s0 >= cfg.eos_position && obj.s0 <= cfg.eos_clear_until) {
      return std::nullopt;  // a real object already bounds the approach
    }
  }
  ObjectPrediction virt;
  virt.id = "virtual_eos";
  virt.lane = "main";
  virt.s0 = cfg.eos_position;
  virt.v = cfg.eos_speed;
  virt.sigma0 = cfg.eos_sigma0;
  virt.sigma_rate = cfg.eos_sigma_rate;
  virt.source = ObjectSource::virtual_eos;
  return virt;
}

}  // namespace camp
