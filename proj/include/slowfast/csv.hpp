#pragma once

#include "slowfast/averaging.hpp"
#include "slowfast/control.hpp"
#include "slowfast/mc.hpp"
#include "slowfast/sde.hpp"
#include "slowfast/types.hpp"

#include <string>
#include <vector>

namespace slowfast {

// Shortest round-trip decimal form (std::to_chars); the same build always
// emits the same bytes, which is what the reproducibility contract needs.
std::string format_double(double v);

std::string path_to_csv(const PathSample& path);
std::string control_to_csv(const Control& control);
Control control_from_csv(const std::string& text, double T);
std::string drift_table_to_csv(const AveragedDrift& drift);
AveragedDrift drift_table_from_csv(const std::string& text);
std::string sweep_to_csv(const LdpSweep& sweep);
std::string flow_to_csv(const FlowMoments& flow);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace slowfast
