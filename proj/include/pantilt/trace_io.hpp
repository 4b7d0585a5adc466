#pragma once

#include "pantilt/sim.hpp"

#include <string>

namespace pantilt::sim {

// Stable, bit-exact trace CSV. Column order is a fixed interface:
//   t_s, target_x_px, target_y_px, detected, confidence, dev_h_deg, dev_v_deg,
//   gain_k, pwm_h_us, pwm_v_us, servo_h_deg, servo_v_deg, mode, iou
// Doubles are rendered with %.10g, detected as 0/1, mode as the mode name.
std::string trace_to_csv(const Trace& trace);

// Same rows as JSON (an array of objects in column order).
std::string trace_to_json(const Trace& trace);

std::string metrics_to_json(const Metrics& m, const Scenario& s);

// Paired comparison summary for two variants of one experiment.
std::string compare_to_json(const CompareReport& rep, const Scenario& a, const Scenario& b);

const char* mode_name(TrackerMode::Kind kind);

// Create parent directories as needed and write content; throws Error on
// filesystem failure.
void write_text_file(const std::string& path, const std::string& content);

} // namespace pantilt::sim
