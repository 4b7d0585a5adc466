#include "pantilt/servo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pantilt {

void validate(const ServoParams& p) {
    if (!(p.inertia > 0.0))
        throw ConfigError("servo inertia must be positive");
    if (p.damping < 0.0 || p.stiffness < 0.0)
        throw ConfigError("servo damping and stiffness must be non-negative");
    if (!(p.torque_limit > 0.0))
        throw ConfigError("servo torque_limit must be positive");
}

void validate(const PidGains& g) {
    if (g.kp < 0.0 || g.ki < 0.0 || g.kd < 0.0)
        throw ConfigError("pid gains must be non-negative");
    if (!(g.integral_limit > 0.0))
        throw ConfigError("pid integral_limit must be positive");
}

std::pair<double, PidState> pid_step(const PidGains& gains, PidState state,
                                     double error_rad, double dt_s) {
    if (!(dt_s > 0.0))
        throw DomainError("pid dt must be positive");
    if (!std::isfinite(error_rad))
        throw DomainError("pid error must be finite");
    state.integral = std::clamp(state.integral + error_rad * dt_s,
                                -gains.integral_limit, gains.integral_limit);
    const double u = gains.kp * error_rad + gains.ki * state.integral +
                     gains.kd * (error_rad - state.prev_error) / dt_s;
    state.prev_error = error_rad;
    return {u, state};
}

ServoState servo_step(const ServoParams& params, ServoState state,
                      double applied_torque, double dt_s) {
    if (!(dt_s > 0.0))
        throw DomainError("servo dt must be positive");
    if (!std::isfinite(state.angle_rad) || !std::isfinite(state.omega_rad_s))
        throw DomainError("servo state must be finite");
    if (!std::isfinite(applied_torque))
        throw DomainError("servo torque must be finite");

    const double tau = std::clamp(applied_torque, -params.torque_limit, params.torque_limit);
    const auto accel = [&](double th, double om) {
        return (tau - params.damping * om - params.stiffness * th - params.ext_torque) /
               params.inertia;
    };

    const double th = state.angle_rad, om = state.omega_rad_s;
    const double k1_th = om, k1_om = accel(th, om);
    const double k2_th = om + 0.5 * dt_s * k1_om;
    const double k2_om = accel(th + 0.5 * dt_s * k1_th, om + 0.5 * dt_s * k1_om);
    const double k3_th = om + 0.5 * dt_s * k2_om;
    const double k3_om = accel(th + 0.5 * dt_s * k2_th, om + 0.5 * dt_s * k2_om);
    const double k4_th = om + dt_s * k3_om;
    const double k4_om = accel(th + dt_s * k3_th, om + dt_s * k3_om);

    state.angle_rad = th + dt_s / 6.0 * (k1_th + 2.0 * k2_th + 2.0 * k3_th + k4_th);
    state.omega_rad_s = om + dt_s / 6.0 * (k1_om + 2.0 * k2_om + 2.0 * k3_om + k4_om);

    if (state.angle_rad > kMechStopRad) {
        state.angle_rad = kMechStopRad;
        state.omega_rad_s = 0.0;
    } else if (state.angle_rad < -kMechStopRad) {
        state.angle_rad = -kMechStopRad;
        state.omega_rad_s = 0.0;
    }
    return state;
}

std::pair<ServoState, PidState> servo_track(const ServoParams& params, const PidGains& gains,
                                            ServoState state, PidState pid,
                                            double pwm_setpoint_us, const PwmConfig& pwm_cfg,
                                            double dt_s) {
    const double setpoint_rad = pwm_to_angle(pwm_setpoint_us, pwm_cfg) * std::numbers::pi / 180.0;
    auto [torque, pid_next] = pid_step(gains, pid, setpoint_rad - state.angle_rad, dt_s);
    return {servo_step(params, state, torque, dt_s), pid_next};
}

} // namespace pantilt
