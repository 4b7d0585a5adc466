#pragma once

#include "pantilt/angle_map.hpp"

#include <optional>

namespace pantilt {

// Adaptive scaling coefficient applied to deviation angles before the PWM
// conversion. The update compares the current center distance with a decayed
// copy of the previous one and nudges the coefficient by +/-gamma, clamped
// into [k_min, k_max].
struct GainState {
    double gain_k = 0.4;
    double k_min = 0.2;
    double k_max = 0.6;
    double gamma = 0.1;
    double prev_distance = 0.0; // pixels

    friend bool operator==(const GainState&, const GainState&) = default;
};

// Angular window around the image center inside which no correction is sent.
struct DeadBand {
    double threshold_deg = 2.0;

    friend bool operator==(const DeadBand&, const DeadBand&) = default;
};

void validate(const GainState& s);
void validate(const DeadBand& db);

// One coefficient update from the latest center distance (pixels):
//   delta = d_now - prev_distance * (1 - gain_k)
//   gain_k += gamma * sgn(delta), clamped; sgn(0) counts as +1 so a target
//   holding pace with the decay is treated as advancing.
GainState update_gain(GainState state, double distance_now_px);

// Scale both deviation axes by the coefficient.
DeviationAngles apply_gain(const DeviationAngles& dev, double gain_k);

// Dead-band decision: nullopt = hold (both axes strictly inside the band),
// otherwise the deviation is passed through unchanged for adjustment.
std::optional<DeviationAngles> apply_deadband(const DeviationAngles& dev, const DeadBand& db);

// Intersection-over-union of two center-format boxes; 0 when the union is empty.
double iou(const BoundingBox& a, const BoundingBox& b);

// Percentage improvement of a stabilized run over a baseline:
//   (1 - t_with / t_without) * 100.
// Note: one commonly quoted pair of hold times (2.332 s stabilized vs 7.049 s
// baseline) is circulated with the value 67.39%, but this formula evaluates to
// 66.92%; the computed value is returned. See README, "Efficiency metric".
double efficiency(double t_with_s, double t_without_s);

} // namespace pantilt
