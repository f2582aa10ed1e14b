#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "idflow/flow.hpp"
#include "idflow/image_io.hpp"

namespace idflow {

/// Standard optical-flow color wheel. Magnitudes are normalized by vmax
/// (vmax <= 0 normalizes by the largest valid magnitude in the field);
/// zero flow maps to white, invalid pixels to black.
std::vector<uint8_t> flow_to_rgb(const FlowField& flow, double vmax = 0.0);

void write_flow_png(const FlowField& flow, const std::filesystem::path& path, double vmax = 0.0);

/// Color of a single normalized flow vector (|(u,v)| <= 1 stays in gamut).
void flow_color(double u, double v, uint8_t rgb[3]);

}  // namespace idflow
