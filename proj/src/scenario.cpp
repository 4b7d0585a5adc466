#include "pantilt/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace pantilt::sim {

namespace {

using nlohmann::json;

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number())
        throw ConfigError(std::string("scenario field '") + key + "' must be a number");
    return j[key].get<double>();
}

int integer(const json& j, const char* key, int fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number_integer())
        throw ConfigError(std::string("scenario field '") + key + "' must be an integer");
    return j[key].get<int>();
}

bool boolean(const json& j, const char* key, bool fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_boolean())
        throw ConfigError(std::string("scenario field '") + key + "' must be a boolean");
    return j[key].get<bool>();
}

json section(const json& j, const char* key) {
    if (!j.contains(key))
        return json::object();
    if (!j[key].is_object())
        throw ConfigError(std::string("scenario section '") + key + "' must be an object");
    return j[key];
}

Trajectory parse_trajectory(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ConfigError("trajectory must be an object with a string 'type'");
    const std::string type = j["type"].get<std::string>();
    Trajectory t;
    if (type == "linear_pass")
        t.type = Trajectory::Type::LinearPass;
    else if (type == "accelerating")
        t.type = Trajectory::Type::Accelerating;
    else if (type == "step")
        t.type = Trajectory::Type::Step;
    else if (type == "occlusion")
        t.type = Trajectory::Type::Occlusion;
    else
        throw ConfigError("unknown trajectory type '" + type + "'");
    t.depth_m = num(j, "depth_m", t.depth_m);
    t.speed_m_s = num(j, "speed_m_s", t.speed_m_s);
    t.accel_m_s2 = num(j, "a_m_s2", t.accel_m_s2);
    t.end_m = num(j, "end_m", t.end_m);
    t.offset_deg = num(j, "offset_deg", t.offset_deg);
    t.start_s = num(j, "start_s", t.start_s);
    t.end_s = num(j, "end_s", t.end_s);
    t.reappear_az_deg = num(j, "reappear_az_deg", t.reappear_az_deg);
    return t;
}

} // namespace

Scenario load_scenario(const std::string& json_text, const std::string& source_name) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        // the parser message already carries line/column context
        throw ParseError(source_name + ": " + e.what());
    }
    if (!j.is_object())
        throw ConfigError(source_name + ": scenario document must be a JSON object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != 1)
        throw ConfigError(source_name + ": scenario requires \"schema_version\": 1");

    try {
        Scenario s;
        s.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>()
                                                             : source_name;
        s.duration_s = num(j, "duration_s", s.duration_s);
        s.frame_rate_hz = num(j, "frame_rate_hz", s.frame_rate_hz);
        if (j.contains("seed")) {
            if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0)
                throw ConfigError("scenario seed must be a non-negative integer");
            s.seed = j["seed"].get<std::uint64_t>();
        }
        if (!j.contains("trajectory"))
            throw ConfigError("scenario requires a 'trajectory' section");
        s.trajectory = parse_trajectory(j["trajectory"]);

        const json det = section(j, "detector");
        s.detector.center_noise_px = num(det, "center_noise_px", s.detector.center_noise_px);
        s.detector.miss_prob_center = num(det, "miss_prob_center", s.detector.miss_prob_center);
        s.detector.miss_prob_edge = num(det, "miss_prob_edge", s.detector.miss_prob_edge);
        s.detector.iou_center_mean = num(det, "iou_center_mean", s.detector.iou_center_mean);
        s.detector.iou_edge_mean = num(det, "iou_edge_mean", s.detector.iou_edge_mean);
        s.detector.iou_noise_sd = num(det, "iou_noise_sd", s.detector.iou_noise_sd);
        const json conf = section(det, "confidence_model");
        s.detector.confidence.at_center = num(conf, "at_center", s.detector.confidence.at_center);
        s.detector.confidence.slope = num(conf, "slope", s.detector.confidence.slope);
        s.detector.confidence.noise_sd = num(conf, "noise_sd", s.detector.confidence.noise_sd);

        const json ctl = section(j, "control");
        s.control.deadband_on = boolean(ctl, "deadband_on", s.control.deadband_on);
        s.control.adaptive_k = boolean(ctl, "adaptive_k", s.control.adaptive_k);
        s.control.fixed_k = num(ctl, "fixed_k", s.control.fixed_k);
        s.control.servo_enabled = boolean(ctl, "servo_enabled", s.control.servo_enabled);

        const json cam = section(j, "camera");
        s.camera.fov_h_deg = num(cam, "fov_h_deg", s.camera.fov_h_deg);
        s.camera.fov_v_deg = num(cam, "fov_v_deg", s.camera.fov_v_deg);
        s.camera.width_px = integer(cam, "width_px", s.camera.width_px);
        s.camera.height_px = integer(cam, "height_px", s.camera.height_px);

        const json pwm = section(j, "pwm");
        s.pwm.a_max_us = num(pwm, "a_max_us", s.pwm.a_max_us);
        s.pwm.b_min_us = num(pwm, "b_min_us", s.pwm.b_min_us);
        s.pwm.c_center_us = num(pwm, "c_center_us", s.pwm.c_center_us);
        s.pwm.range_deg = num(pwm, "range_deg", s.pwm.range_deg);
        s.pwm.pwm_min_us = num(pwm, "pwm_min_us", s.pwm.pwm_min_us);
        s.pwm.pwm_max_us = num(pwm, "pwm_max_us", s.pwm.pwm_max_us);
        s.pwm.sign_h = num(pwm, "sign_h", s.pwm.sign_h);
        s.pwm.sign_v = num(pwm, "sign_v", s.pwm.sign_v);

        const json srv = section(j, "servo");
        s.servo.inertia = num(srv, "inertia", s.servo.inertia);
        s.servo.damping = num(srv, "damping", s.servo.damping);
        s.servo.stiffness = num(srv, "stiffness", s.servo.stiffness);
        s.servo.ext_torque = num(srv, "ext_torque", s.servo.ext_torque);
        s.servo.torque_limit = num(srv, "torque_limit", s.servo.torque_limit);

        const json pid = section(j, "pid");
        s.pid.kp = num(pid, "kp", s.pid.kp);
        s.pid.ki = num(pid, "ki", s.pid.ki);
        s.pid.kd = num(pid, "kd", s.pid.kd);
        s.pid.integral_limit = num(pid, "integral_limit", s.pid.integral_limit);

        const json gn = section(j, "gain");
        s.gain.gain_k = num(gn, "k_init", s.gain.gain_k);
        s.gain.k_min = num(gn, "k_min", s.gain.k_min);
        s.gain.k_max = num(gn, "k_max", s.gain.k_max);
        s.gain.gamma = num(gn, "gamma", s.gain.gamma);
        s.deadband.threshold_deg = num(j, "deadband_deg", s.deadband.threshold_deg);

        const json srch = section(j, "search");
        s.search.fast_speed_us_per_s =
            num(srch, "fast_speed_us_per_s", s.search.fast_speed_us_per_s);
        s.search.slow_speed_us_per_s =
            num(srch, "slow_speed_us_per_s", s.search.slow_speed_us_per_s);
        s.search.home_pwm_us = num(srch, "home_pwm_us", s.search.home_pwm_us);
        s.search.home_window_us = num(srch, "home_window_us", s.search.home_window_us);
        s.search.loss_timeout_frames =
            integer(srch, "loss_timeout_frames", s.search.loss_timeout_frames);

        const json tgt = section(j, "target");
        s.target_width_m = num(tgt, "width_m", s.target_width_m);
        s.target_height_m = num(tgt, "height_m", s.target_height_m);

        validate(s);
        return s;
    } catch (const ConfigError& e) {
        throw ConfigError(source_name + ": " + e.what());
    }
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str(), std::filesystem::path(path).stem().string());
}

} // namespace pantilt::sim
