#pragma once

#include "pantilt/angle_map.hpp"
#include "pantilt/gain.hpp"
#include "pantilt/recapture.hpp"
#include "pantilt/servo.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pantilt::sim {

// Target paths, all at constant height (elevation 0). Unused fields are
// ignored for a given type:
//  - LinearPass: constant-depth fly-by centered on the camera axis,
//    x(t) = speed_m_s * (t - duration/2) at z = depth_m.
//  - Accelerating: stationary for a 1 s lead-in, then x = a*t'^2/2 capped at
//    end_m, at z = depth_m.
//  - Step: fixed bearing offset_deg from the camera's home axis.
//  - Occlusion: target sits on-axis, then during [start_s, end_s) it is
//    undetectable and relocates to bearing reappear_az_deg, where it stays.
struct Trajectory {
    enum class Type { LinearPass, Accelerating, Step, Occlusion };
    Type type = Type::Step;
    double depth_m = 4.0;
    double speed_m_s = 0.5;      // LinearPass
    double accel_m_s2 = 0.35;    // Accelerating
    double end_m = 3.0;          // Accelerating travel cap
    double offset_deg = 10.0;    // Step
    double start_s = 1.0;        // Occlusion window start
    double end_s = 3.0;          // Occlusion window end
    double reappear_az_deg = 45.0;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Synthetic detector quality model. Miss probability, expected box IOU and
// confidence are interpolated between their center and edge values by
// r = (distance of the true target from the image center) / (half diagonal).
struct ConfidenceModel {
    double at_center = 0.95;
    double slope = -0.13; // confidence = at_center + slope * r, then noise
    double noise_sd = 0.02;

    friend bool operator==(const ConfidenceModel&, const ConfidenceModel&) = default;
};

struct DetectorModel {
    double center_noise_px = 1.0;
    double miss_prob_center = 0.0;
    double miss_prob_edge = 0.05;
    double iou_center_mean = 0.93;
    double iou_edge_mean = 0.91;
    double iou_noise_sd = 0.01;
    ConfidenceModel confidence;

    friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

struct ControlOptions {
    bool deadband_on = true;
    bool adaptive_k = true;
    double fixed_k = 0.6;      // used when adaptive_k is false
    bool servo_enabled = true; // false = camera bolted down (sampling runs)

    friend bool operator==(const ControlOptions&, const ControlOptions&) = default;
};

struct Scenario {
    std::string name = "scenario";
    double duration_s = 10.0;
    double frame_rate_hz = 30.0;
    std::uint64_t seed = 1;
    Trajectory trajectory;
    DetectorModel detector;
    ControlOptions control;
    CameraModel camera;
    PwmConfig pwm;
    ServoParams servo;
    PidGains pid;
    GainState gain;
    DeadBand deadband;
    SearchConfig search;
    double target_width_m = 0.5;
    double target_height_m = 0.5;
};

void validate(const Scenario& s);

// True when the two scenarios may be compared head-to-head: everything equal
// except the control flags (and the name).
bool comparable(const Scenario& a, const Scenario& b);

struct WorldPos {
    double x_m = 0.0; // right
    double y_m = 0.0; // up
    double z_m = 0.0; // forward (depth)
};

struct PixelPos {
    double x_px = 0.0;
    double y_px = 0.0;
};

// Target world position and detectability window for a trajectory.
WorldPos target_world(const Trajectory& traj, double t_s, double duration_s);
bool target_occluded(const Trajectory& traj, double t_s);

// Pinhole-bearing projection of a world point into the image of a camera
// panned to cam_az_deg / tilted to cam_el_deg. nullopt when the point is
// behind the camera or its bearing falls outside the field of view.
std::optional<PixelPos> project_target(const WorldPos& world, double cam_az_deg,
                                       double cam_el_deg, const CameraModel& cam);

// One row per frame. target_x/y_px is the true (noise-free) projected center,
// recorded even when it falls outside the image bounds. detected/confidence/
// iou describe this frame's detector output; dev_h/dev_v are the deviation
// angles the controller acted on this frame (zero when it had none, e.g. the
// first frame or during a miss), which lag the detector by the one-frame
// pipeline latency.
struct TraceRecord {
    double t_s = 0.0;
    double target_x_px = 0.0;
    double target_y_px = 0.0;
    bool detected = false;
    double confidence = 0.0;
    double dev_h_deg = 0.0;
    double dev_v_deg = 0.0;
    double gain_k = 0.0;
    double pwm_h_us = 0.0;
    double pwm_v_us = 0.0;
    double servo_h_deg = 0.0;
    double servo_v_deg = 0.0;
    TrackerMode::Kind mode = TrackerMode::Kind::Tracking;
    double iou = 0.0;
};

using Trace = std::vector<TraceRecord>;

// Run the closed loop: project -> detect -> recapture FSM -> deviation ->
// dead-band -> gain -> incremental PWM -> servo substeps. Deterministic for a
// given scenario + seed.
Trace run_scenario(const Scenario& s);

inline constexpr double kConfidenceThresholds[] = {0.5, 0.6, 0.7, 0.8, 0.9};

struct Metrics {
    int frames = 0;
    int detected_frames = 0;
    // First time after which the true deviation stays inside the dead-band on
    // both axes for at least 0.5 s; absent if that never happens.
    std::optional<double> settle_time_s;
    double rms_error_px = 0.0;
    // Std-dev of frame-to-frame PWM deltas (both axes pooled) after settling;
    // over the trailing half of the run when the run never settled.
    double pwm_jitter_us = 0.0;
    std::optional<double> mean_iou_center;
    std::optional<double> mean_iou_edge;
    int iou_center_count = 0;
    int iou_edge_count = 0;
    // Fraction of detected frames at or above each confidence threshold.
    std::vector<std::pair<double, double>> confidence_retention;
};

Metrics compute_metrics(const Trace& trace, const Scenario& s);

struct CompareReport {
    Metrics a, b;
    // (1 - settle_a / settle_b) * 100: positive when variant A settles faster.
    std::optional<double> eta_pct;
    double jitter_delta_us = 0.0; // jitter_a - jitter_b
};

// Runs both scenarios (which must be `comparable`) and pairs their metrics.
CompareReport compare_runs(const Scenario& a, const Scenario& b);

} // namespace pantilt::sim
