#include "pantilt/gain.hpp"

#include <algorithm>
#include <cmath>

namespace pantilt {

void validate(const GainState& s) {
    if (!(s.k_min <= s.gain_k && s.gain_k <= s.k_max))
        throw ConfigError("gain_k must lie within [k_min, k_max]");
    if (!(s.gamma > 0.0))
        throw ConfigError("gain gamma must be positive");
    if (s.prev_distance < 0.0)
        throw ConfigError("gain prev_distance must be non-negative");
}

void validate(const DeadBand& db) {
    if (db.threshold_deg < 0.0)
        throw ConfigError("dead-band threshold must be non-negative");
}

GainState update_gain(GainState state, double distance_now_px) {
    if (!(distance_now_px >= 0.0) || !std::isfinite(distance_now_px))
        throw DomainError("distance must be finite and non-negative");
    const double delta = distance_now_px - state.prev_distance * (1.0 - state.gain_k);
    const double sign = delta >= 0.0 ? 1.0 : -1.0;
    state.gain_k = std::clamp(state.gain_k + state.gamma * sign, state.k_min, state.k_max);
    state.prev_distance = distance_now_px;
    return state;
}

DeviationAngles apply_gain(const DeviationAngles& dev, double gain_k) {
    return {dev.h_deg * gain_k, dev.v_deg * gain_k};
}

std::optional<DeviationAngles> apply_deadband(const DeviationAngles& dev, const DeadBand& db) {
    validate(db);
    if (std::abs(dev.h_deg) < db.threshold_deg && std::abs(dev.v_deg) < db.threshold_deg)
        return std::nullopt; // hold: target already counts as centered
    return dev;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    if (a.w < 0.0 || a.h < 0.0 || b.w < 0.0 || b.h < 0.0)
        throw DomainError("box sides must be non-negative");
    const double ix = std::max(0.0, std::min(a.cx + a.w / 2.0, b.cx + b.w / 2.0) -
                                        std::max(a.cx - a.w / 2.0, b.cx - b.w / 2.0));
    const double iy = std::max(0.0, std::min(a.cy + a.h / 2.0, b.cy + b.h / 2.0) -
                                        std::max(a.cy - a.h / 2.0, b.cy - b.h / 2.0));
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double efficiency(double t_with_s, double t_without_s) {
    if (!(t_without_s > 0.0))
        throw DomainError("baseline time must be positive");
    if (t_with_s < 0.0)
        throw DomainError("stabilized time must be non-negative");
    return (1.0 - t_with_s / t_without_s) * 100.0;
}

} // namespace pantilt
