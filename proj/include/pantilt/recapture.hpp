#pragma once

#include "pantilt/angle_map.hpp"

namespace pantilt {

// Lost-target sweep profile. The pan axis shuttles between the PWM limits,
// moving slowly inside a window around the home pulse (where the target is
// most likely to reappear) and fast elsewhere.
struct SearchConfig {
    double fast_speed_us_per_s = 1800.0;
    double slow_speed_us_per_s = 600.0;
    double home_pwm_us = 1500.0;
    double home_window_us = 200.0;
    int loss_timeout_frames = 5;

    friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

// Tracker mode for one frame. Holding is the dead-band sub-state of tracking
// (target centered, no correction sent). direction is +/-1 while Searching,
// 0 otherwise.
struct TrackerMode {
    enum class Kind { Tracking, Holding, Searching };
    Kind kind = Kind::Tracking;
    int direction = 0;
};

void validate(const SearchConfig& cfg);

// Per-frame mode transition. A present detection always yields Tracking
// (search exits immediately); otherwise Tracking/Holding fall into Searching
// once frames_missed reaches the loss timeout, starting toward the nearer PWM
// extreme. An established search keeps its direction.
TrackerMode on_frame(TrackerMode mode, bool detection_present, int frames_missed,
                     double current_pwm_h_us, const SearchConfig& cfg,
                     const PwmConfig& pwm_cfg);

struct SearchStep {
    double pwm_h_us = 0.0;
    TrackerMode mode;
};

// Advance the sweep by dt. Zone changes (home window edges) and reversals at
// the PWM limits are handled at their exact crossing times, so simulated sweep
// timing matches the closed-form period. The vertical axis is untouched by
// design: the sweep is horizontal-only.
SearchStep search_step(const TrackerMode& mode, double current_pwm_h_us,
                       const SearchConfig& cfg, const PwmConfig& pwm_cfg, double dt_s);

// Time for one full shuttle (both directions):
//   2 * (span_inside_window / slow + span_outside_window / fast).
double sweep_period_s(const SearchConfig& cfg, const PwmConfig& pwm_cfg);

} // namespace pantilt
