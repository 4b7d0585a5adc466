#include "pantilt/scenario.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace pantilt;
using namespace pantilt::sim;

namespace {
const std::string kMinimal = R"({"schema_version": 1, "trajectory": {"type": "step"}})";
}

TEST_CASE("a minimal document fills every default") {
    const Scenario s = load_scenario(kMinimal, "minimal");
    CHECK(s.name == "minimal");
    CHECK(s.duration_s == 10.0);
    CHECK(s.frame_rate_hz == 30.0);
    CHECK(s.seed == 1);
    CHECK(s.trajectory.type == Trajectory::Type::Step);
    CHECK(s.camera == CameraModel{});
    CHECK(s.pwm == PwmConfig{});
    CHECK(s.servo == ServoParams{});
    CHECK(s.pid == PidGains{});
    CHECK(s.gain == GainState{});
    CHECK(s.search == SearchConfig{});
    CHECK(s.control.deadband_on);
    CHECK(s.control.adaptive_k);
}

TEST_CASE("explicit fields land in the right places") {
    const std::string doc = R"({
        "schema_version": 1,
        "name": "custom",
        "duration_s": 4.5,
        "frame_rate_hz": 25,
        "seed": 77,
        "trajectory": {"type": "occlusion", "depth_m": 6, "start_s": 0.5,
                       "end_s": 2.5, "reappear_az_deg": -20},
        "detector": {"center_noise_px": 2.5, "miss_prob_edge": 0.1,
                     "confidence_model": {"at_center": 0.9, "slope": -0.2, "noise_sd": 0}},
        "control": {"deadband_on": false, "adaptive_k": false, "fixed_k": 0.3,
                    "servo_enabled": false},
        "camera": {"fov_h_deg": 90, "width_px": 1280},
        "pwm": {"sign_h": 1},
        "servo": {"inertia": 0.002},
        "pid": {"kp": 1.25, "ki": 0.5},
        "gain": {"k_init": 0.2, "gamma": 0.05},
        "deadband_deg": 1.5,
        "search": {"loss_timeout_frames": 8},
        "target": {"width_m": 0.8, "height_m": 0.4}
    })";
    const Scenario s = load_scenario(doc, "file_stem");
    CHECK(s.name == "custom");
    CHECK(s.duration_s == 4.5);
    CHECK(s.frame_rate_hz == 25.0);
    CHECK(s.seed == 77);
    CHECK(s.trajectory.type == Trajectory::Type::Occlusion);
    CHECK(s.trajectory.depth_m == 6.0);
    CHECK(s.trajectory.reappear_az_deg == -20.0);
    CHECK(s.detector.center_noise_px == 2.5);
    CHECK(s.detector.miss_prob_edge == 0.1);
    CHECK(s.detector.confidence.at_center == 0.9);
    CHECK(!s.control.deadband_on);
    CHECK(!s.control.adaptive_k);
    CHECK(s.control.fixed_k == 0.3);
    CHECK(!s.control.servo_enabled);
    CHECK(s.camera.fov_h_deg == 90.0);
    CHECK(s.camera.width_px == 1280);
    CHECK(s.camera.height_px == 480); // untouched default
    CHECK(s.pwm.sign_h == 1.0);
    CHECK(s.servo.inertia == 0.002);
    CHECK(s.pid.kp == 1.25);
    CHECK(s.gain.gain_k == 0.2);
    CHECK(s.gain.gamma == 0.05);
    CHECK(s.deadband.threshold_deg == 1.5);
    CHECK(s.search.loss_timeout_frames == 8);
    CHECK(s.target_width_m == 0.8);
    CHECK(s.target_height_m == 0.4);
}

TEST_CASE("malformed json is a parse error with position context") {
    const std::string broken = "{\"schema_version\": 1,\n  \"trajectory\": {]}";
    try {
        load_scenario(broken, "broken.json");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("broken.json") != std::string::npos);
        CHECK(msg.find("line") != std::string::npos); // parser position diagnostics
    }
}

TEST_CASE("structurally valid but wrong content is a config error") {
    // ConfigError and ParseError must stay disjoint: none of these throw ParseError
    CHECK_THROWS_AS(load_scenario("[1, 2]", "doc"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"trajectory": {"type": "step"}})", "doc"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"schema_version": 2, "trajectory": {"type": "step"}})",
                                  "doc"),
                    ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"schema_version": 1})", "doc"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"schema_version": 1, "trajectory": {"type": "spiral"}})",
                                  "doc"),
                    ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"schema_version": 1, "trajectory": "step"})", "doc"),
                    ConfigError);
    CHECK_THROWS_AS(
        load_scenario(R"({"schema_version": 1, "duration_s": "long",
                          "trajectory": {"type": "step"}})",
                      "doc"),
        ConfigError);
    CHECK_THROWS_AS(
        load_scenario(R"({"schema_version": 1, "seed": -3, "trajectory": {"type": "step"}})",
                      "doc"),
        ConfigError);
    CHECK_THROWS_AS(
        load_scenario(R"({"schema_version": 1, "seed": 1.5, "trajectory": {"type": "step"}})",
                      "doc"),
        ConfigError);
    CHECK_THROWS_AS(
        load_scenario(R"({"schema_version": 1, "control": {"deadband_on": "yes"},
                          "trajectory": {"type": "step"}})",
                      "doc"),
        ConfigError);
}

TEST_CASE("semantic validation runs behind the loader and carries the source name") {
    const std::string doc = R"({
        "schema_version": 1,
        "trajectory": {"type": "step"},
        "control": {"adaptive_k": false, "fixed_k": 0.9}
    })";
    try {
        load_scenario(doc, "bad_config");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad_config") != std::string::npos);
        CHECK(msg.find("fixed_k") != std::string::npos);
    }
}

TEST_CASE("loading from disk uses the file stem as the default name") {
    const auto dir = std::filesystem::temp_directory_path() / "pantilt_scenario_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "disk_case.json";
    {
        std::ofstream out(path);
        out << kMinimal;
    }
    const Scenario s = load_scenario_file(path.string());
    CHECK(s.name == "disk_case");
    std::filesystem::remove_all(dir);

    CHECK_THROWS_AS(load_scenario_file((dir / "missing.json").string()), ParseError);
}
