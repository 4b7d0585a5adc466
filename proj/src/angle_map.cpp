#include "pantilt/angle_map.hpp"

#include <algorithm>
#include <cmath>

namespace pantilt {

void validate(const CameraModel& cam) {
    if (!(cam.fov_h_deg > 0.0 && cam.fov_h_deg < 180.0))
        throw ConfigError("camera fov_h_deg must be in (0, 180)");
    if (!(cam.fov_v_deg > 0.0 && cam.fov_v_deg < 180.0))
        throw ConfigError("camera fov_v_deg must be in (0, 180)");
    if (cam.width_px <= 0 || cam.height_px <= 0)
        throw ConfigError("camera resolution must be positive");
}

void validate(const PwmConfig& cfg) {
    if (!(cfg.a_max_us > cfg.b_min_us))
        throw ConfigError("pwm a_max_us must exceed b_min_us");
    if (!(cfg.b_min_us <= cfg.pwm_min_us && cfg.pwm_min_us <= cfg.c_center_us &&
          cfg.c_center_us <= cfg.pwm_max_us && cfg.pwm_max_us <= cfg.a_max_us))
        throw ConfigError("pwm limits must satisfy b_min <= pwm_min <= c_center <= pwm_max <= a_max");
    if (!(cfg.range_deg > 0.0))
        throw ConfigError("pwm range_deg must be positive");
    if (std::abs(cfg.sign_h) != 1.0 || std::abs(cfg.sign_v) != 1.0)
        throw ConfigError("pwm sign_h/sign_v must be +1 or -1");
}

DeviationAngles compute_deviation(const BoundingBox& target, const CameraModel& cam) {
    validate(cam);
    if (!std::isfinite(target.cx) || !std::isfinite(target.cy))
        throw DomainError("target center must be finite");
    const double dx = target.cx - cam.width_px / 2.0;
    const double dy = target.cy - cam.height_px / 2.0;
    return {dx * cam.fov_h_deg / cam.width_px, dy * cam.fov_v_deg / cam.height_px};
}

PwmCommand angle_to_pwm(const DeviationAngles& dev, const PwmConfig& cfg) {
    validate(cfg);
    const double span = cfg.a_max_us - cfg.b_min_us;
    return {cfg.c_center_us + cfg.sign_h * span * dev.h_deg / cfg.range_deg,
            cfg.c_center_us + cfg.sign_v * span * dev.v_deg / cfg.range_deg};
}

double saturate(double pwm_us, const PwmConfig& cfg) {
    validate(cfg);
    return std::max(std::min(pwm_us, cfg.pwm_max_us), cfg.pwm_min_us);
}

double pwm_to_angle(double pwm_us, const PwmConfig& cfg) {
    validate(cfg);
    if (!(pwm_us >= cfg.b_min_us && pwm_us <= cfg.a_max_us))
        throw DomainError("pwm outside the convertible range [b_min_us, a_max_us]");
    return (pwm_us - cfg.c_center_us) * cfg.range_deg / (cfg.a_max_us - cfg.b_min_us);
}

} // namespace pantilt
