#include "pantilt/recapture.hpp"

#include <algorithm>
#include <cmath>

namespace pantilt {

namespace {
constexpr double kEps = 1e-9; // microseconds; guards boundary comparisons
}

void validate(const SearchConfig& cfg) {
    if (!(cfg.slow_speed_us_per_s > 0.0) || cfg.fast_speed_us_per_s < cfg.slow_speed_us_per_s)
        throw ConfigError("search speeds must satisfy fast >= slow > 0");
    if (cfg.home_window_us < 0.0)
        throw ConfigError("search home_window_us must be non-negative");
    if (cfg.loss_timeout_frames < 1)
        throw ConfigError("search loss_timeout_frames must be at least 1");
}

TrackerMode on_frame(TrackerMode mode, bool detection_present, int frames_missed,
                     double current_pwm_h_us, const SearchConfig& cfg,
                     const PwmConfig& pwm_cfg) {
    validate(cfg);
    if (frames_missed < 0)
        throw DomainError("frames_missed must be non-negative");
    if (detection_present)
        return {TrackerMode::Kind::Tracking, 0};
    if (mode.kind == TrackerMode::Kind::Searching)
        return mode;
    if (frames_missed >= cfg.loss_timeout_frames) {
        validate(pwm_cfg);
        const double up = pwm_cfg.pwm_max_us - current_pwm_h_us;
        const double down = current_pwm_h_us - pwm_cfg.pwm_min_us;
        return {TrackerMode::Kind::Searching, up <= down ? +1 : -1};
    }
    return {TrackerMode::Kind::Tracking, 0}; // coast on the last command
}

SearchStep search_step(const TrackerMode& mode, double current_pwm_h_us,
                       const SearchConfig& cfg, const PwmConfig& pwm_cfg, double dt_s) {
    validate(cfg);
    validate(pwm_cfg);
    if (mode.kind != TrackerMode::Kind::Searching || std::abs(mode.direction) != 1)
        throw DomainError("search_step requires Searching mode with direction +/-1");
    if (!(dt_s > 0.0))
        throw DomainError("search dt must be positive");

    const double lo = pwm_cfg.pwm_min_us, hi = pwm_cfg.pwm_max_us;
    double p = std::clamp(current_pwm_h_us, lo, hi);
    int dir = mode.direction;
    if (hi - lo < kEps)
        return {p, {TrackerMode::Kind::Searching, dir}};

    const double wlo = cfg.home_pwm_us - cfg.home_window_us;
    const double whi = cfg.home_pwm_us + cfg.home_window_us;
    double remaining = dt_s;
    for (int guard = 0; remaining > 0.0 && guard < 1000; ++guard) {
        // Reverse when sitting at an extreme and still heading outward.
        if (dir > 0 && p >= hi - kEps)
            dir = -1;
        else if (dir < 0 && p <= lo + kEps)
            dir = +1;

        // Segment runs to the nearest zone edge or extreme strictly ahead.
        double end = dir > 0 ? hi : lo;
        for (double b : {wlo, whi}) {
            if (b <= lo || b >= hi)
                continue;
            if (dir > 0 && b > p + kEps && b < end)
                end = b;
            else if (dir < 0 && b < p - kEps && b > end)
                end = b;
        }
        const double mid = 0.5 * (p + end);
        const double speed = std::abs(mid - cfg.home_pwm_us) <= cfg.home_window_us
                                 ? cfg.slow_speed_us_per_s
                                 : cfg.fast_speed_us_per_s;
        const double seg_time = std::abs(end - p) / speed;
        if (seg_time >= remaining) {
            p += dir * speed * remaining;
            remaining = 0.0;
        } else {
            p = end;
            remaining -= seg_time;
        }
    }
    return {std::clamp(p, lo, hi), {TrackerMode::Kind::Searching, dir}};
}

double sweep_period_s(const SearchConfig& cfg, const PwmConfig& pwm_cfg) {
    validate(cfg);
    validate(pwm_cfg);
    const double lo = pwm_cfg.pwm_min_us, hi = pwm_cfg.pwm_max_us;
    const double inside = std::max(0.0, std::min(cfg.home_pwm_us + cfg.home_window_us, hi) -
                                            std::max(cfg.home_pwm_us - cfg.home_window_us, lo));
    const double outside = (hi - lo) - inside;
    return 2.0 * (inside / cfg.slow_speed_us_per_s + outside / cfg.fast_speed_us_per_s);
}

} // namespace pantilt
