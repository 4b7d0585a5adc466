#include "pantilt/trace_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace pantilt::sim {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

nlohmann::ordered_json metrics_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["frames"] = m.frames;
    j["detected_frames"] = m.detected_frames;
    j["settle_time_s"] = m.settle_time_s ? nlohmann::ordered_json(*m.settle_time_s)
                                         : nlohmann::ordered_json(nullptr);
    j["rms_error_px"] = m.rms_error_px;
    j["pwm_jitter_us"] = m.pwm_jitter_us;
    j["mean_iou_center"] = m.mean_iou_center ? nlohmann::ordered_json(*m.mean_iou_center)
                                             : nlohmann::ordered_json(nullptr);
    j["mean_iou_edge"] = m.mean_iou_edge ? nlohmann::ordered_json(*m.mean_iou_edge)
                                         : nlohmann::ordered_json(nullptr);
    j["iou_center_count"] = m.iou_center_count;
    j["iou_edge_count"] = m.iou_edge_count;
    nlohmann::ordered_json conf = nlohmann::ordered_json::object();
    for (const auto& [thr, frac] : m.confidence_retention) {
        char key[16];
        std::snprintf(key, sizeof(key), "%.2f", thr);
        conf[key] = frac;
    }
    j["confidence_retention"] = conf;
    return j;
}

} // namespace

const char* mode_name(TrackerMode::Kind kind) {
    switch (kind) {
    case TrackerMode::Kind::Tracking:
        return "Tracking";
    case TrackerMode::Kind::Holding:
        return "Holding";
    case TrackerMode::Kind::Searching:
        return "Searching";
    }
    return "?";
}

std::string trace_to_csv(const Trace& trace) {
    std::string out = "t_s,target_x_px,target_y_px,detected,confidence,dev_h_deg,dev_v_deg,"
                      "gain_k,pwm_h_us,pwm_v_us,servo_h_deg,servo_v_deg,mode,iou\n";
    for (const TraceRecord& r : trace) {
        out += fmt(r.t_s);
        out += ',';
        out += fmt(r.target_x_px);
        out += ',';
        out += fmt(r.target_y_px);
        out += ',';
        out += r.detected ? '1' : '0';
        out += ',';
        out += fmt(r.confidence);
        out += ',';
        out += fmt(r.dev_h_deg);
        out += ',';
        out += fmt(r.dev_v_deg);
        out += ',';
        out += fmt(r.gain_k);
        out += ',';
        out += fmt(r.pwm_h_us);
        out += ',';
        out += fmt(r.pwm_v_us);
        out += ',';
        out += fmt(r.servo_h_deg);
        out += ',';
        out += fmt(r.servo_v_deg);
        out += ',';
        out += mode_name(r.mode);
        out += ',';
        out += fmt(r.iou);
        out += '\n';
    }
    return out;
}

std::string trace_to_json(const Trace& trace) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const TraceRecord& r : trace) {
        nlohmann::ordered_json row;
        row["t_s"] = r.t_s;
        row["target_x_px"] = r.target_x_px;
        row["target_y_px"] = r.target_y_px;
        row["detected"] = r.detected;
        row["confidence"] = r.confidence;
        row["dev_h_deg"] = r.dev_h_deg;
        row["dev_v_deg"] = r.dev_v_deg;
        row["gain_k"] = r.gain_k;
        row["pwm_h_us"] = r.pwm_h_us;
        row["pwm_v_us"] = r.pwm_v_us;
        row["servo_h_deg"] = r.servo_h_deg;
        row["servo_v_deg"] = r.servo_v_deg;
        row["mode"] = mode_name(r.mode);
        row["iou"] = r.iou;
        rows.push_back(std::move(row));
    }
    return rows.dump(2) + "\n";
}

std::string metrics_to_json(const Metrics& m, const Scenario& s) {
    nlohmann::ordered_json j;
    j["scenario"] = s.name;
    j["seed"] = s.seed;
    j["metrics"] = metrics_json(m);
    return j.dump(2) + "\n";
}

std::string compare_to_json(const CompareReport& rep, const Scenario& a, const Scenario& b) {
    nlohmann::ordered_json j;
    j["scenario_a"] = a.name;
    j["scenario_b"] = b.name;
    j["seed"] = a.seed;
    j["eta_pct"] =
        rep.eta_pct ? nlohmann::ordered_json(*rep.eta_pct) : nlohmann::ordered_json(nullptr);
    j["jitter_delta_us"] = rep.jitter_delta_us;
    j["a"] = metrics_json(rep.a);
    j["b"] = metrics_json(rep.b);
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec)
            throw Error("cannot create directory '" + p.parent_path().string() +
                        "': " + ec.message());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        throw Error("write failed for '" + path + "'");
}

} // namespace pantilt::sim
