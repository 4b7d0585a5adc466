#pragma once

#include "pantilt/errors.hpp"

namespace pantilt {

// Camera geometry: field of view and sensor resolution.
struct CameraModel {
    double fov_h_deg = 60.0;
    double fov_v_deg = 45.0;
    int width_px = 640;
    int height_px = 480;

    friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

// Axis-aligned box in center format (cx, cy is the box center).
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
};

// Angular offset of the target from the optical axis.
// Positive h_deg = target right of center, positive v_deg = target below.
struct DeviationAngles {
    double h_deg = 0.0;
    double v_deg = 0.0;
};

// Pulse-width constants for a 270-degree digital servo: a_max_us/b_min_us are
// the pulse widths at the two rotation extremes, c_center_us the neutral
// pulse. pwm_min/pwm_max model mechanical stops and may be tighter than the
// electrical range. sign_h / sign_v (each +1 or -1) select the direction each
// axis moves for a positive deviation; the defaults reproduce the asymmetric
// horizontal-minus / vertical-plus convention of the conversion formulas.
struct PwmConfig {
    double a_max_us = 2500.0;
    double b_min_us = 500.0;
    double c_center_us = 1500.0;
    double range_deg = 270.0;
    double pwm_min_us = 500.0;
    double pwm_max_us = 2500.0;
    double sign_h = -1.0;
    double sign_v = +1.0;

    friend bool operator==(const PwmConfig&, const PwmConfig&) = default;
};

struct PwmCommand {
    double pwm_h_us = 0.0;
    double pwm_v_us = 0.0;
};

void validate(const CameraModel& cam);
void validate(const PwmConfig& cfg);

// Pixel offset from the image center scaled to angles by FOV/resolution.
DeviationAngles compute_deviation(const BoundingBox& target, const CameraModel& cam);

// Linear angle->pulse-width map around the neutral pulse; not saturated.
PwmCommand angle_to_pwm(const DeviationAngles& dev, const PwmConfig& cfg);

// Clamp a pulse width into [pwm_min_us, pwm_max_us].
double saturate(double pwm_us, const PwmConfig& cfg);

// Shaft angle (degrees, 0 at the neutral pulse) for a pulse width inside the
// electrical range [b_min_us, a_max_us]. Inverse of the angle->PWM slope.
double pwm_to_angle(double pwm_us, const PwmConfig& cfg);

} // namespace pantilt
