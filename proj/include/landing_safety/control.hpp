#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace landing_safety {

// Vertical-axis point-mass plant: p_dot = v, v_dot = -g + (u + sigma) / m.
// u is collective thrust along +z, sigma the lumped force disturbance.
struct PlantState {
  double altitude_m = 0.0;
  double velocity_mps = 0.0;  // negative while descending
};

struct PlantParams {
  double mass_kg = 1000.0;
  double f_max_n = 14500.0;
  double gravity = 9.81;
};

inline void validate(const PlantParams & params)
{
  if (params.mass_kg <= 0.0 || params.f_max_n <= 0.0 || params.gravity <= 0.0) {
    throw std::invalid_argument("plant parameters must be positive");
  }
  if (params.f_max_n <= params.mass_kg * params.gravity) {
    throw std::invalid_argument("thrust ceiling cannot support hover");
  }
}

struct DisturbanceComponent {
  enum class Kind { Constant, Step, Sinusoid };
  Kind kind = Kind::Constant;
  double amplitude_n = 0.0;
  double onset_s = 0.0;    // Step, Sinusoid
  double freq_hz = 0.0;    // Sinusoid
};

struct DisturbanceProfile {
  std::vector<DisturbanceComponent> components;

  double value(double t) const
  {
    double sum = 0.0;
    for (const auto & c : components) {
      switch (c.kind) {
        case DisturbanceComponent::Kind::Constant:
          sum += c.amplitude_n;
          break;
        case DisturbanceComponent::Kind::Step:
          if (t >= c.onset_s) sum += c.amplitude_n;
          break;
        case DisturbanceComponent::Kind::Sinusoid:
          if (t >= c.onset_s) {
            sum += c.amplitude_n * std::sin(2.0 * std::numbers::pi * c.freq_hz * (t - c.onset_s));
          }
          break;
      }
    }
    return sum;
  }
};

// Exact update under force held constant over the step.
inline PlantState plant_step(
  const PlantState & state, const PlantParams & params, double u_total, double sigma, double dt)
{
  const double u = std::clamp(u_total, 0.0, params.f_max_n);
  const double a = -params.gravity + (u + sigma) / params.mass_kg;
  PlantState next;
  next.altitude_m = state.altitude_m + state.velocity_mps * dt + 0.5 * a * dt * dt;
  next.velocity_mps = state.velocity_mps + a * dt;
  return next;
}

struct ControllerConfig {
  double k_p = 2000.0;        // N per m of altitude error (2.0 * mass by default)
  double k_v = 2800.0;        // N per m/s of velocity error (2.8 * mass by default)
  double a_s = -50.0;         // predictor error feedback, must be negative
  double t_s = 0.005;         // controller period, s
  double cutoff_rads = 2.0 * std::numbers::pi * 100.0;  // adaptation low-pass
};

inline ControllerConfig default_controller_config(const PlantParams & params)
{
  ControllerConfig cfg;
  cfg.k_p = 2.0 * params.mass_kg;
  cfg.k_v = 2.8 * params.mass_kg;
  return cfg;
}

struct ControllerState {
  ControllerConfig config;
  double v_hat = 0.0;       // predictor velocity
  double sigma_hat = 0.0;   // deadbeat cancellation value, biased as an estimate
  double sigma_est = 0.0;   // unbiased disturbance estimate from the residual
  double sigma_bar = 0.0;   // low-passed estimate driving u_ad and a_max
  bool primed = false;      // v_hat anchored to the first measurement
};

inline ControllerState make_controller(const ControllerConfig & config)
{
  if (config.a_s >= 0.0 || config.t_s <= 0.0 || config.cutoff_rads <= 0.0) {
    throw std::invalid_argument("need a_s < 0, t_s > 0, cutoff > 0");
  }
  ControllerState ctrl;
  ctrl.config = config;
  return ctrl;
}

// Gravity feedforward plus PD on the commanded descent profile.
inline double baseline_input(
  const PlantState & state, double target_p, double target_v, const PlantParams & params,
  const ControllerConfig & config, double target_a = 0.0)
{
  // Gravity plus reference-acceleration feedforward; PD closes the rest.
  // Without the feedforward the tracker trails a decelerating profile by
  // a/k_p meters and arrives at the ground carrying that error as speed.
  return params.mass_kg * (params.gravity + target_a) +
         config.k_p * (target_p - state.altitude_m) +
         config.k_v * (target_v - state.velocity_mps);
}

// phi = (exp(a_s t_s) - 1) / a_s, the weight the error feedback leaves on a
// constant input injected over one period.
inline double adaptation_phi(const ControllerConfig & config)
{
  return (std::exp(config.a_s * config.t_s) - 1.0) / config.a_s;
}

// Deadbeat law: choose sigma_hat so the propagated error and its own injected
// contribution cancel exactly: exp(a_s t_s) v_tilde + phi sigma_hat / m = 0.
inline double adaptation_update(
  ControllerState & ctrl, double v_tilde, const PlantParams & params)
{
  const double gain =
    std::exp(ctrl.config.a_s * ctrl.config.t_s) / adaptation_phi(ctrl.config);
  ctrl.sigma_hat = -params.mass_kg * gain * v_tilde;
  return ctrl.sigma_hat;
}

// With the deadbeat value applied, the residual error one step later is purely
// the plant disturbance integrated over the period: v_tilde = -sigma t_s / m.
// Inverting that gives the disturbance one period delayed and without the
// exp(a_s t_s) factor the cancellation value carries.
inline double disturbance_estimate(
  const ControllerState & ctrl, double v_tilde, const PlantParams & params)
{
  return -params.mass_kg * v_tilde / ctrl.config.t_s;
}

struct LowpassResult {
  double sigma_bar = 0.0;
  double u_ad = 0.0;
};

inline LowpassResult lowpass_step(ControllerState & ctrl, double estimate)
{
  const double blend = 1.0 - std::exp(-ctrl.config.cutoff_rads * ctrl.config.t_s);
  ctrl.sigma_bar += blend * (estimate - ctrl.sigma_bar);
  return {ctrl.sigma_bar, -ctrl.sigma_bar};
}

// Advances the predictor one period. The error term decays by exp(a_s t_s)
// exactly and the cancellation input enters through phi; both ride on the
// nominal constant-acceleration path of the measured state under the force
// actually applied (saturation included, disturbance excluded).
inline double predictor_step(
  ControllerState & ctrl, double measured_v, double u_applied, const PlantParams & params)
{
  const double v_tilde = ctrl.v_hat - measured_v;
  const double nominal_accel = -params.gravity + u_applied / params.mass_kg;
  ctrl.v_hat = measured_v + nominal_accel * ctrl.config.t_s +
               std::exp(ctrl.config.a_s * ctrl.config.t_s) * v_tilde +
               adaptation_phi(ctrl.config) * ctrl.sigma_hat / params.mass_kg;
  return ctrl.v_hat;
}

struct ControlStepResult {
  double u_b = 0.0;
  double u_ad = 0.0;
  double u_total = 0.0;
  double v_tilde = 0.0;
  double sigma_hat = 0.0;
  double sigma_est = 0.0;
  double sigma_bar = 0.0;
  double v_hat = 0.0;
  double a_max_dc = 0.0;  // deceleration the vehicle can still produce
};

// One controller period: baseline, adaptation, low-pass, predictor.
inline ControlStepResult control_step(
  ControllerState & ctrl, const PlantState & measured, double target_p, double target_v,
  const PlantParams & params, double target_a = 0.0)
{
  if (!ctrl.primed) {
    ctrl.v_hat = measured.velocity_mps;
    ctrl.primed = true;
  }
  ControlStepResult out;
  out.u_b = baseline_input(measured, target_p, target_v, params, ctrl.config, target_a);
  out.v_tilde = ctrl.v_hat - measured.velocity_mps;
  out.sigma_hat = adaptation_update(ctrl, out.v_tilde, params);
  ctrl.sigma_est = disturbance_estimate(ctrl, out.v_tilde, params);
  out.sigma_est = ctrl.sigma_est;
  const LowpassResult lp = lowpass_step(ctrl, ctrl.sigma_est);
  out.sigma_bar = lp.sigma_bar;
  out.u_ad = lp.u_ad;
  out.u_total = std::clamp(out.u_b + out.u_ad, 0.0, params.f_max_n);
  out.a_max_dc = (params.f_max_n + ctrl.sigma_bar) / params.mass_kg - params.gravity;
  out.v_hat = predictor_step(ctrl, measured.velocity_mps, out.u_total, params);
  return out;
}

struct CapabilityReport {
  double timestamp = 0.0;
  double a_max_mps2 = 0.0;
};

// Static budget: thrust floor under the worst disturbance and heaviest mass.
struct WorstCaseBudget {
  double d_max_n = 2235.0;
  double m_max_kg = 1100.0;
};

inline double a_max_worst_case(
  double f_max_n, double d_max_n, double m_max_kg, double gravity = 9.81)
{
  if (m_max_kg <= 0.0) {
    throw std::invalid_argument("worst-case mass must be positive");
  }
  const double a = (f_max_n - std::abs(d_max_n)) / m_max_kg - gravity;
  if (a <= 0.0) {
    throw std::domain_error("worst-case deceleration budget is not positive; no safe descent");
  }
  return a;
}

}  // namespace landing_safety
