#include "pantilt/sim.hpp"

#include "pantilt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace pantilt::sim {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

struct Bearings {
    double h_deg = 0.0;      // positive = target right of the camera axis
    double v_down_deg = 0.0; // positive = target below the camera axis
    bool in_front = false;
};

// Camera pose is given as azimuth/elevation of the optical axis; the world
// frame has x right, y up, z forward from the camera pivot.
Bearings bearings_of(const WorldPos& w, double cam_az_deg, double cam_el_deg) {
    if (!(w.z_m > 0.0))
        return {};
    const double az = std::atan2(w.x_m, w.z_m) * kDegPerRad;
    const double el = std::atan2(w.y_m, std::hypot(w.x_m, w.z_m)) * kDegPerRad;
    return {az - cam_az_deg, -(el - cam_el_deg), true};
}

struct Detection {
    double cx = 0.0;
    double cy = 0.0;
    double confidence = 0.0;
    double iou = 0.0;
};

} // namespace

void validate(const Scenario& s) {
    if (!(s.duration_s > 0.0))
        throw ConfigError("scenario duration must be positive");
    if (!(s.frame_rate_hz > 0.0))
        throw ConfigError("scenario frame rate must be positive");
    if (std::lround(s.duration_s * s.frame_rate_hz) < 1)
        throw ConfigError("scenario must span at least one frame");
    validate(s.camera);
    validate(s.pwm);
    validate(s.servo);
    validate(s.pid);
    validate(s.gain);
    validate(s.deadband);
    validate(s.search);

    const Trajectory& tr = s.trajectory;
    if (!(tr.depth_m > 0.0))
        throw ConfigError("trajectory depth must be positive");
    if (tr.type == Trajectory::Type::LinearPass && !std::isfinite(tr.speed_m_s))
        throw ConfigError("linear-pass speed must be finite");
    if (tr.type == Trajectory::Type::Accelerating && (tr.accel_m_s2 < 0.0 || tr.end_m < 0.0))
        throw ConfigError("accelerating trajectory needs accel >= 0 and end_m >= 0");
    if (tr.type == Trajectory::Type::Step && std::abs(tr.offset_deg) >= 90.0)
        throw ConfigError("step offset must lie in (-90, 90) degrees");
    if (tr.type == Trajectory::Type::Occlusion) {
        if (!(tr.start_s >= 0.0 && tr.end_s > tr.start_s))
            throw ConfigError("occlusion window must satisfy 0 <= start < end");
        if (std::abs(tr.reappear_az_deg) >= 90.0)
            throw ConfigError("occlusion reappear bearing must lie in (-90, 90) degrees");
    }

    const DetectorModel& d = s.detector;
    for (double p : {d.miss_prob_center, d.miss_prob_edge})
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError("detector miss probabilities must lie in [0, 1]");
    if (!(d.iou_center_mean > 0.0 && d.iou_center_mean <= 1.0) ||
        !(d.iou_edge_mean > 0.0 && d.iou_edge_mean <= 1.0))
        throw ConfigError("detector iou means must lie in (0, 1]");
    if (d.iou_center_mean < d.iou_edge_mean)
        throw ConfigError("detector iou must not improve toward the edge");
    if (d.center_noise_px < 0.0 || d.iou_noise_sd < 0.0 || d.confidence.noise_sd < 0.0)
        throw ConfigError("detector noise levels must be non-negative");

    if (!s.control.adaptive_k &&
        !(s.control.fixed_k >= s.gain.k_min && s.control.fixed_k <= s.gain.k_max))
        throw ConfigError("fixed_k must lie within [k_min, k_max] when adaptive gain is off");
    if (!(s.target_width_m > 0.0 && s.target_height_m > 0.0))
        throw ConfigError("target physical size must be positive");
}

bool comparable(const Scenario& a, const Scenario& b) {
    return a.duration_s == b.duration_s && a.frame_rate_hz == b.frame_rate_hz &&
           a.seed == b.seed && a.trajectory == b.trajectory && a.detector == b.detector &&
           a.camera == b.camera && a.pwm == b.pwm && a.servo == b.servo && a.pid == b.pid &&
           a.gain == b.gain && a.deadband == b.deadband && a.search == b.search &&
           a.target_width_m == b.target_width_m && a.target_height_m == b.target_height_m;
}

WorldPos target_world(const Trajectory& traj, double t_s, double duration_s) {
    const double z = traj.depth_m;
    switch (traj.type) {
    case Trajectory::Type::LinearPass:
        return {traj.speed_m_s * (t_s - duration_s / 2.0), 0.0, z};
    case Trajectory::Type::Accelerating: {
        const double tp = t_s - 1.0; // 1 s stationary lead-in
        const double x = tp <= 0.0 ? 0.0 : std::min(0.5 * traj.accel_m_s2 * tp * tp, traj.end_m);
        return {x, 0.0, z};
    }
    case Trajectory::Type::Step:
        return {z * std::tan(traj.offset_deg / kDegPerRad), 0.0, z};
    case Trajectory::Type::Occlusion: {
        const double az = t_s < traj.start_s ? 0.0 : traj.reappear_az_deg;
        return {z * std::tan(az / kDegPerRad), 0.0, z};
    }
    }
    throw ConfigError("unknown trajectory type");
}

bool target_occluded(const Trajectory& traj, double t_s) {
    return traj.type == Trajectory::Type::Occlusion && t_s >= traj.start_s && t_s < traj.end_s;
}

std::optional<PixelPos> project_target(const WorldPos& world, double cam_az_deg,
                                       double cam_el_deg, const CameraModel& cam) {
    validate(cam);
    const Bearings b = bearings_of(world, cam_az_deg, cam_el_deg);
    if (!b.in_front || std::abs(b.h_deg) > cam.fov_h_deg / 2.0 ||
        std::abs(b.v_down_deg) > cam.fov_v_deg / 2.0)
        return std::nullopt;
    return PixelPos{cam.width_px / 2.0 + b.h_deg / cam.fov_h_deg * cam.width_px,
                    cam.height_px / 2.0 + b.v_down_deg / cam.fov_v_deg * cam.height_px};
}

Trace run_scenario(const Scenario& s) {
    validate(s);
    Rng rng(s.seed);

    ServoState servo_h{}, servo_v{};
    PidState pid_h{}, pid_v{};
    double pwm_h = s.pwm.c_center_us, pwm_v = s.pwm.c_center_us;
    GainState gain = s.gain;
    TrackerMode mode{};
    int missed = 0;
    std::optional<Detection> pending; // detector output awaiting the 1-frame latency

    const double frame_dt = 1.0 / s.frame_rate_hz;
    const int nframes = static_cast<int>(std::lround(s.duration_s * s.frame_rate_hz));
    const int nsub = std::max(1, static_cast<int>(std::lround(frame_dt / 1e-3)));
    const double sub_dt = frame_dt / nsub;
    const double w = s.camera.width_px, h = s.camera.height_px;
    const double half_diag = std::hypot(w / 2.0, h / 2.0);

    Trace trace;
    trace.reserve(nframes);
    for (int f = 0; f < nframes; ++f) {
        const double t = f * frame_dt;
        const WorldPos world = target_world(s.trajectory, t, s.duration_s);
        const double cam_az = -servo_h.angle_rad * kDegPerRad;
        const double cam_el = -servo_v.angle_rad * kDegPerRad;
        const Bearings b = bearings_of(world, cam_az, cam_el);

        // True projected center, kept even when outside the image bounds.
        const double tx = w / 2.0 + b.h_deg / s.camera.fov_h_deg * w;
        const double ty = h / 2.0 + b.v_down_deg / s.camera.fov_v_deg * h;
        const bool in_frame = b.in_front && std::abs(b.h_deg) <= s.camera.fov_h_deg / 2.0 &&
                              std::abs(b.v_down_deg) <= s.camera.fov_v_deg / 2.0;

        std::optional<Detection> det;
        if (in_frame && !target_occluded(s.trajectory, t)) {
            // Always five draws per visible frame, in this order, so paired
            // runs with different control flags consume identical noise.
            const double u_miss = rng.uniform();
            const double noise_x = rng.normal();
            const double noise_y = rng.normal();
            const double noise_iou = rng.normal();
            const double noise_conf = rng.normal();

            const DetectorModel& dm = s.detector;
            const double r =
                std::min(std::hypot(tx - w / 2.0, ty - h / 2.0) / half_diag, 1.0);
            const double p_miss =
                dm.miss_prob_center + (dm.miss_prob_edge - dm.miss_prob_center) * r;
            if (u_miss >= p_miss) {
                const double cx = tx + noise_x * dm.center_noise_px;
                const double cy = ty + noise_y * dm.center_noise_px;

                // True box size from the target's angular extent at this depth.
                const double ang_w =
                    2.0 * std::atan(s.target_width_m / (2.0 * world.z_m)) * kDegPerRad;
                const double ang_h =
                    2.0 * std::atan(s.target_height_m / (2.0 * world.z_m)) * kDegPerRad;
                const BoundingBox truth{tx, ty, ang_w / s.camera.fov_h_deg * w,
                                        ang_h / s.camera.fov_v_deg * h};
                // Scale the detected box so a centered detection would land on
                // the desired IOU, then record the actual geometric overlap of
                // the noise-shifted box.
                const double want =
                    std::clamp(dm.iou_center_mean + (dm.iou_edge_mean - dm.iou_center_mean) * r +
                                   noise_iou * dm.iou_noise_sd,
                               0.05, 1.0);
                const double f_scale = std::sqrt(want);
                const BoundingBox found{cx, cy, truth.w * f_scale, truth.h * f_scale};
                const double conf =
                    std::clamp(dm.confidence.at_center + dm.confidence.slope * r +
                                   noise_conf * dm.confidence.noise_sd,
                               0.0, 1.0);
                det = Detection{cx, cy, conf, iou(found, truth)};
            }
        }

        // The controller acts on the previous frame's detection.
        const std::optional<Detection> act = pending;
        pending = det;
        if (act)
            missed = 0;
        else
            ++missed;

        mode = on_frame(mode, act.has_value(), missed, pwm_h, s.search, s.pwm);

        double dev_h = 0.0, dev_v = 0.0;
        if (mode.kind == TrackerMode::Kind::Searching) {
            if (s.control.servo_enabled) {
                const SearchStep step = search_step(mode, pwm_h, s.search, s.pwm, frame_dt);
                pwm_h = step.pwm_h_us;
                mode = step.mode;
            }
        } else if (act) {
            const DeviationAngles dev = compute_deviation({act->cx, act->cy, 0.0, 0.0}, s.camera);
            dev_h = dev.h_deg;
            dev_v = dev.v_deg;
            gain = update_gain(gain, std::hypot(act->cx - w / 2.0, act->cy - h / 2.0));
            const double k_use = s.control.adaptive_k ? gain.gain_k : s.control.fixed_k;
            const bool hold = s.control.deadband_on && !apply_deadband(dev, s.deadband);
            if (hold) {
                mode.kind = TrackerMode::Kind::Holding;
            } else if (s.control.servo_enabled) {
                // The angle->PWM map applied incrementally around the current
                // command rather than the fixed neutral pulse.
                const PwmCommand delta = angle_to_pwm(apply_gain(dev, k_use), s.pwm);
                pwm_h = saturate(pwm_h + (delta.pwm_h_us - s.pwm.c_center_us), s.pwm);
                pwm_v = saturate(pwm_v + (delta.pwm_v_us - s.pwm.c_center_us), s.pwm);
            }
        }

        if (s.control.servo_enabled) {
            for (int i = 0; i < nsub; ++i) {
                std::tie(servo_h, pid_h) =
                    servo_track(s.servo, s.pid, servo_h, pid_h, pwm_h, s.pwm, sub_dt);
                std::tie(servo_v, pid_v) =
                    servo_track(s.servo, s.pid, servo_v, pid_v, pwm_v, s.pwm, sub_dt);
            }
        }

        trace.push_back({t, tx, ty, det.has_value(), det ? det->confidence : 0.0, dev_h, dev_v,
                         gain.gain_k, pwm_h, pwm_v, servo_h.angle_rad * kDegPerRad,
                         servo_v.angle_rad * kDegPerRad, mode.kind, det ? det->iou : 0.0});
    }
    return trace;
}

Metrics compute_metrics(const Trace& trace, const Scenario& s) {
    if (trace.empty())
        throw DomainError("metrics require a non-empty trace");
    Metrics m;
    const int n = static_cast<int>(trace.size());
    m.frames = n;

    const double w = s.camera.width_px, h = s.camera.height_px;
    const auto true_dev_h = [&](const TraceRecord& r) {
        return (r.target_x_px - w / 2.0) * s.camera.fov_h_deg / w;
    };
    const auto true_dev_v = [&](const TraceRecord& r) {
        return (r.target_y_px - h / 2.0) * s.camera.fov_v_deg / h;
    };

    // Settling: both axes strictly inside the dead-band for >= 0.5 s.
    const int win = std::max(1, static_cast<int>(std::lround(0.5 * s.frame_rate_hz)));
    std::vector<char> inside(n);
    for (int i = 0; i < n; ++i)
        inside[i] = std::abs(true_dev_h(trace[i])) < s.deadband.threshold_deg &&
                    std::abs(true_dev_v(trace[i])) < s.deadband.threshold_deg;
    int settle_idx = -1;
    for (int i = 0; i + win <= n && settle_idx < 0; ++i) {
        bool all_in = true;
        for (int j = i; j < i + win; ++j)
            if (!inside[j]) {
                all_in = false;
                break;
            }
        if (all_in)
            settle_idx = i;
    }
    if (settle_idx >= 0)
        m.settle_time_s = trace[settle_idx].t_s;

    double sq_sum = 0.0;
    for (const TraceRecord& r : trace) {
        const double ex = r.target_x_px - w / 2.0, ey = r.target_y_px - h / 2.0;
        sq_sum += ex * ex + ey * ey;
    }
    m.rms_error_px = std::sqrt(sq_sum / n);

    // PWM jitter: pooled frame-to-frame deltas of both axes from settling on
    // (or over the trailing half when the run never settled).
    const int j0 = settle_idx >= 0 ? settle_idx : n / 2;
    std::vector<double> deltas;
    for (int i = j0 + 1; i < n; ++i) {
        deltas.push_back(trace[i].pwm_h_us - trace[i - 1].pwm_h_us);
        deltas.push_back(trace[i].pwm_v_us - trace[i - 1].pwm_v_us);
    }
    if (!deltas.empty()) {
        double mean = 0.0;
        for (double d : deltas)
            mean += d;
        mean /= deltas.size();
        double var = 0.0;
        for (double d : deltas)
            var += (d - mean) * (d - mean);
        m.pwm_jitter_us = std::sqrt(var / deltas.size());
    }

    // IOU split: central area is the middle third of each image dimension,
    // classified by the true target center; detected frames only.
    double c_sum = 0.0, e_sum = 0.0;
    for (const TraceRecord& r : trace) {
        if (!r.detected)
            continue;
        ++m.detected_frames;
        const bool in_frame = std::abs(true_dev_h(r)) <= s.camera.fov_h_deg / 2.0 &&
                              std::abs(true_dev_v(r)) <= s.camera.fov_v_deg / 2.0;
        if (!in_frame)
            continue;
        const bool central = r.target_x_px >= w / 3.0 && r.target_x_px <= 2.0 * w / 3.0 &&
                             r.target_y_px >= h / 3.0 && r.target_y_px <= 2.0 * h / 3.0;
        if (central) {
            c_sum += r.iou;
            ++m.iou_center_count;
        } else {
            e_sum += r.iou;
            ++m.iou_edge_count;
        }
    }
    if (m.iou_center_count > 0)
        m.mean_iou_center = c_sum / m.iou_center_count;
    if (m.iou_edge_count > 0)
        m.mean_iou_edge = e_sum / m.iou_edge_count;

    for (double thr : kConfidenceThresholds) {
        int above = 0;
        for (const TraceRecord& r : trace)
            if (r.detected && r.confidence >= thr)
                ++above;
        m.confidence_retention.emplace_back(
            thr, m.detected_frames > 0 ? static_cast<double>(above) / m.detected_frames : 0.0);
    }
    return m;
}

CompareReport compare_runs(const Scenario& a, const Scenario& b) {
    if (!comparable(a, b))
        throw ConfigError("scenarios differ beyond control flags; comparison refused");
    CompareReport rep;
    rep.a = compute_metrics(run_scenario(a), a);
    rep.b = compute_metrics(run_scenario(b), b);
    if (rep.a.settle_time_s && rep.b.settle_time_s && *rep.b.settle_time_s > 0.0)
        rep.eta_pct = efficiency(*rep.a.settle_time_s, *rep.b.settle_time_s);
    rep.jitter_delta_us = rep.a.pwm_jitter_us - rep.b.pwm_jitter_us;
    return rep;
}

} // namespace pantilt::sim
