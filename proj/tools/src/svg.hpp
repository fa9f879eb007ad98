#pragma once

#include <string>

#include "gsindy/pipeline.hpp"

namespace gsindy::cli {

/// Standalone SVG line chart of predicted vs. actual glucose over one day.
std::string render_trajectory_svg(const TrajectoryRows& rows, const std::string& title);

}  // namespace gsindy::cli
