#include "camp/tracking.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace camp {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat62 = Eigen::Matrix<double, 6, 2>;

Vec6 pack(const VehicleState& s) {
  Vec6 v;
  v << s.x, s.y, s.heading, s.v, s.a, s.steer;
  return v;
}

Vec6 dynamics(const Vec6& x, const ControlPair& u, const VehicleParams& p) {
  double phi = x[2], v = x[3], a = x[4], delta = x[5];
  double g = 1.0 + (v / p.v_char) * (v / p.v_char);
  Vec6 f;
  f << v * std::cos(phi), v * std::sin(phi), v * delta / (p.wheelbase * g), a, u[0], u[1];
  return f;
}

Mat6 state_jacobian(const Vec6& x, const VehicleParams& p) {
  double phi = x[2], v = x[3], delta = x[5];
  double r = v / p.v_char;
  double g = 1.0 + r * r;
  Mat6 A = Mat6::Zero();
  A(0, 2) = -v * std::sin(phi);
  A(0, 3) = std::cos(phi);
  A(1, 2) = v * std::cos(phi);
  A(1, 3) = std::sin(phi);
  A(2, 3) = delta * (1.0 - r * r) / (p.wheelbase * g * g);
  A(2, 5) = v / (p.wheelbase * g);
  A(3, 4) = 1.0;
  return A;
}

Vec6 rk4(const Vec6& x, const ControlPair& u, const VehicleParams& p, double dt,
         Mat6* phi_x, Mat62* phi_u) {
  Vec6 k1 = dynamics(x, u, p);
  Vec6 x2 = x + 0.5 * dt * k1;
  Vec6 k2 = dynamics(x2, u, p);
  Vec6 x3 = x + 0.5 * dt * k2;
  Vec6 k3 = dynamics(x3, u, p);
  Vec6 x4 = x + dt * k3;
  Vec6 k4 = dynamics(x4, u, p);
  Vec6 out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (phi_x) {
    Mat6 I = Mat6::Identity();
    Mat62 B = Mat62::Zero();
    B(4, 0) = 1.0;
    B(5, 1) = 1.0;
    Mat6 A1 = state_jacobian(x, p);
    Mat6 A2 = state_jacobian(x2, p);
    Mat6 A3 = state_jacobian(x3, p);
    Mat6 A4 = state_jacobian(x4, p);
    Mat6 K1 = A1;
    Mat6 K2 = A2 * (I + 0.5 * dt * K1);
    Mat6 K3 = A3 * (I + 0.5 * dt * K2);
    Mat6 K4 = A4 * (I + dt * K3);
    *phi_x = I + dt / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    Mat62 M1 = B;
    Mat62 M2 = A2 * (0.5 * dt * M1) + B;
    Mat62 M3 = A3 * (0.5 * dt * M2) + B;
    Mat62 M4 = A4 * (dt * M3) + B;
    *phi_u = dt / 6.0 * (M1 + 2.0 * M2 + 2.0 * M3 + M4);
  }
  return out;
}

double hinge(double value) { return value > 0.0 ? value : 0.0; }

}  // namespace

VehicleState bicycle_step(const VehicleState& x, const VehicleParams& p, double u_jerk,
                          double u_steer_rate, double dt) {
  Vec6 v = rk4(pack(x), {u_jerk, u_steer_rate}, p, dt, nullptr, nullptr);
  VehicleState out{v[0], v[1], v[2], v[3], v[4], v[5]};
  out.steer = std::clamp(out.steer, -p.steer_max, p.steer_max);
  if (out.v < 0.0) out.v = 0.0;
  return out;
}

double lateral_acceleration(const VehicleState& x, const VehicleParams& p) {
  double g = 1.0 + (x.v / p.v_char) * (x.v / p.v_char);
  return x.v * x.v * x.steer / (p.wheelbase * g);
}

Tracker::Tracker(const ReferencePath& path, const VehicleParams& params,
                 const TrackerConfig& cfg)
    : path_(path), params_(params), cfg_(cfg) {}

void Tracker::reset() {
  warm_.clear();
  has_warm_ = false;
}

double Tracker::cost_and_gradient(const VehicleState& x0, const LongitudinalTrajectory& plan,
                                  double plan_age, const std::vector<ControlPair>& controls,
                                  std::vector<ControlPair>* gradient) const {
  const int N = cfg_.horizon_steps;
  const double dt = cfg_.dt;
  const bool want_grad = gradient != nullptr;

  std::vector<Mat6> phi_x(want_grad ? N : 0);
  std::vector<Mat62> phi_u(want_grad ? N : 0);
  std::vector<Vec6> dldx(want_grad ? N + 1 : 0, Vec6::Zero());

  // A candidate control sequence whose rollout escapes the corridor is not an
  // error, just a hopeless trial: report infinite cost so the line search
  // backs off.
  auto hopeless = [&]() {
    if (gradient) gradient->assign(static_cast<std::size_t>(N), {0.0, 0.0});
    return std::numeric_limits<double>::infinity();
  };

  Vec6 x = pack(x0);
  int hint = -1;

  double cost = 0.0;
  for (int k = 0; k < N; ++k) {
    const ControlPair& u = controls[static_cast<std::size_t>(k)];
    cost += cfg_.r_jerk * u[0] * u[0] + cfg_.r_steer_rate * u[1] * u[1];
    x = rk4(x, u, params_, dt, want_grad ? &phi_x[k] : nullptr,
            want_grad ? &phi_u[k] : nullptr);

    ProjectionDetail proj;
    try {
      proj = project_detailed(path_, {x[0], x[1]}, &hint);
    } catch (const OutOfCorridor&) {
      return hopeless();
    }
    auto ref = plan.state_at(plan_age + (k + 1) * dt);

    double e_s = proj.s - ref.s;
    double e_d = proj.d;
    double e_phi = wrap_angle(x[2] - proj.heading_ref);
    double e_v = x[3] - ref.v;
    double e_a = x[4] - ref.a;

    double g = 1.0 + (x[3] / params_.v_char) * (x[3] / params_.v_char);
    double a_perp = x[3] * x[3] * x[5] / (params_.wheelbase * g);
    double h_a = hinge(std::abs(a_perp) - cfg_.a_perp_max);
    double h_d = hinge(std::abs(x[5]) - params_.steer_max);
    double h_v = hinge(-x[3]);

    cost += cfg_.w_s * e_s * e_s + cfg_.w_d * e_d * e_d + cfg_.w_phi * e_phi * e_phi +
            cfg_.w_v * e_v * e_v + cfg_.w_a * e_a * e_a + cfg_.rho_aperp * h_a * h_a +
            cfg_.rho_steer * h_d * h_d + cfg_.rho_vneg * h_v * h_v;

    if (want_grad) {
      Vec6 dl = Vec6::Zero();
      double gx = 2.0 * cfg_.w_s * e_s * proj.tangent.x + 2.0 * cfg_.w_d * e_d * proj.normal.x -
                  2.0 * cfg_.w_phi * e_phi * proj.dheading_ds * proj.tangent.x;
      double gy = 2.0 * cfg_.w_s * e_s * proj.tangent.y + 2.0 * cfg_.w_d * e_d * proj.normal.y -
                  2.0 * cfg_.w_phi * e_phi * proj.dheading_ds * proj.tangent.y;
      dl[0] = gx;
      dl[1] = gy;
      dl[2] = 2.0 * cfg_.w_phi * e_phi;
      double sign_ap = a_perp >= 0.0 ? 1.0 : -1.0;
      double daperp_dv = 2.0 * x[3] * x[5] / (params_.wheelbase * g * g);
      double daperp_ddelta = x[3] * x[3] / (params_.wheelbase * g);
      dl[3] = 2.0 * cfg_.w_v * e_v + 2.0 * cfg_.rho_aperp * h_a * sign_ap * daperp_dv -
              2.0 * cfg_.rho_vneg * h_v;
      dl[4] = 2.0 * cfg_.w_a * e_a;
      dl[5] = 2.0 * cfg_.rho_aperp * h_a * sign_ap * daperp_ddelta +
              2.0 * cfg_.rho_steer * h_d * (x[5] >= 0.0 ? 1.0 : -1.0);
      dldx[static_cast<std::size_t>(k + 1)] = dl;
    }
  }

  if (want_grad) {
    gradient->assign(static_cast<std::size_t>(N), {0.0, 0.0});
    Vec6 lambda = dldx[static_cast<std::size_t>(N)];
    for (int k = N - 1; k >= 0; --k) {
      const ControlPair& u = controls[static_cast<std::size_t>(k)];
      Eigen::Vector2d gu = phi_u[static_cast<std::size_t>(k)].transpose() * lambda;
      (*gradient)[static_cast<std::size_t>(k)] = {
          2.0 * cfg_.r_jerk * u[0] + gu[0], 2.0 * cfg_.r_steer_rate * u[1] + gu[1]};
      lambda = phi_x[static_cast<std::size_t>(k)].transpose() * lambda;
      if (k >= 1) lambda += dldx[static_cast<std::size_t>(k)];
    }
  }
  return cost;
}

TrackerSolution Tracker::solve(const VehicleState& x0, const LongitudinalTrajectory& plan,
                               double plan_age) {
  const int N = cfg_.horizon_steps;
  std::vector<ControlPair> U =
      has_warm_ ? warm_ : std::vector<ControlPair>(static_cast<std::size_t>(N), {0.0, 0.0});
  U.resize(static_cast<std::size_t>(N), {0.0, 0.0});

  auto clamp_controls = [&](std::vector<ControlPair>& seq) {
    for (auto& u : seq) {
      u[0] = std::clamp(u[0], -cfg_.u_jerk_max, cfg_.u_jerk_max);
      u[1] = std::clamp(u[1], -cfg_.u_steer_rate_max, cfg_.u_steer_rate_max);
    }
  };
  clamp_controls(U);

  std::vector<ControlPair> G;
  double J = cost_and_gradient(x0, plan, plan_age, U, &G);

  double alpha = 0.25;
  int iterations = 0;
  for (int iter = 0; iter < cfg_.max_iters; ++iter) {
    ++iterations;
    bool accepted = false;
    std::vector<ControlPair> trial(U.size());
    for (int bt = 0; bt < cfg_.max_backtracks; ++bt) {
      double step_sq = 0.0;
      for (std::size_t i = 0; i < U.size(); ++i) {
        trial[i] = {U[i][0] - alpha * G[i][0], U[i][1] - alpha * G[i][1]};
      }
      clamp_controls(trial);
      for (std::size_t i = 0; i < U.size(); ++i) {
        double d0 = trial[i][0] - U[i][0];
        double d1 = trial[i][1] - U[i][1];
        step_sq += d0 * d0 + d1 * d1;
      }
      if (step_sq < cfg_.step_tol * cfg_.step_tol) {
        accepted = false;
        break;
      }
      double J_trial = cost_and_gradient(x0, plan, plan_age, trial, nullptr);
      if (std::isfinite(J_trial) &&
          (!std::isfinite(J) || J_trial <= J - 1e-4 * step_sq / alpha)) {
        U.swap(trial);
        J = J_trial;
        alpha = std::min(alpha * 1.5, 4.0);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      double gmax = 0.0;
      for (const auto& g : G) gmax = std::max({gmax, std::abs(g[0]), std::abs(g[1])});
      if (iter == 0 && gmax > 1e3) {
        throw SolverStall("line search failed with gradient norm " + std::to_string(gmax));
      }
      break;
    }
    cost_and_gradient(x0, plan, plan_age, U, &G);
  }

  warm_ = U;
  has_warm_ = true;
  return {U, J, iterations};
}

}  // namespace camp
