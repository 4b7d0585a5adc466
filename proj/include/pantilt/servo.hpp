#pragma once

#include "pantilt/angle_map.hpp"

#include <numbers>
#include <utility>

namespace pantilt {

// Second-order rotational plant driven by a torque:
//   inertia * theta'' + damping * theta' + stiffness * theta + ext_torque = tau
struct ServoParams {
    double inertia = 1e-3;      // kg*m^2
    double damping = 0.05;      // N*m*s/rad
    double stiffness = 0.2;     // N*m/rad
    double ext_torque = 0.0;    // N*m, constant load
    double torque_limit = 0.5;  // N*m, actuator saturation

    friend bool operator==(const ServoParams&, const ServoParams&) = default;
};

struct ServoState {
    double angle_rad = 0.0;
    double omega_rad_s = 0.0;
};

struct PidGains {
    double kp = 2.0;
    double ki = 1.0;  // 1/s
    double kd = 0.05; // s
    double integral_limit = 1.0; // rad*s anti-windup clamp on the integral term

    friend bool operator==(const PidGains&, const PidGains&) = default;
};

struct PidState {
    double integral = 0.0;   // rad*s
    double prev_error = 0.0; // rad
};

// Shafts hit mechanical stops at +/-135 deg (the 270-degree span made physical).
inline constexpr double kMechStopRad = 3.0 * std::numbers::pi / 4.0;

void validate(const ServoParams& p);
void validate(const PidGains& g);

// One PID update: returns the commanded torque and the advanced controller
// state. Rectangle-rule integral with an anti-windup clamp, backward
// difference for the derivative.
std::pair<double, PidState> pid_step(const PidGains& gains, PidState state,
                                     double error_rad, double dt_s);

// One fixed-step RK4 integration of the plant under a constant applied torque
// (clamped to +/-torque_limit). The angle is clamped at the mechanical stops
// with the velocity zeroed.
ServoState servo_step(const ServoParams& params, ServoState state,
                      double applied_torque, double dt_s);

// Closed-loop step: convert the PWM setpoint to a shaft angle, run the PID on
// the angle error, and drive the plant with the resulting torque.
std::pair<ServoState, PidState> servo_track(const ServoParams& params, const PidGains& gains,
                                            ServoState state, PidState pid,
                                            double pwm_setpoint_us, const PwmConfig& pwm_cfg,
                                            double dt_s);

} // namespace pantilt
