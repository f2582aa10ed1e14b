#include "idflow/viz.hpp"

#include <algorithm>
#include <cmath>

namespace idflow {
namespace {

// Middlebury wheel: smooth transitions over six hue arcs.
constexpr int kRY = 15, kYG = 6, kGC = 4, kCB = 11, kBM = 13, kMR = 6;
constexpr int kWheelSize = kRY + kYG + kGC + kCB + kBM + kMR;  // 55

struct Wheel {
  float r[kWheelSize], g[kWheelSize], b[kWheelSize];
  Wheel() {
    int k = 0;
    for (int i = 0; i < kRY; ++i, ++k) {
      r[k] = 255;
      g[k] = 255.f * i / kRY;
      b[k] = 0;
    }
    for (int i = 0; i < kYG; ++i, ++k) {
      r[k] = 255 - 255.f * i / kYG;
      g[k] = 255;
      b[k] = 0;
    }
    for (int i = 0; i < kGC; ++i, ++k) {
      r[k] = 0;
      g[k] = 255;
      b[k] = 255.f * i / kGC;
    }
    for (int i = 0; i < kCB; ++i, ++k) {
      r[k] = 0;
      g[k] = 255 - 255.f * i / kCB;
      b[k] = 255;
    }
    for (int i = 0; i < kBM; ++i, ++k) {
      r[k] = 255.f * i / kBM;
      g[k] = 0;
      b[k] = 255;
    }
    for (int i = 0; i < kMR; ++i, ++k) {
      r[k] = 255;
      g[k] = 0;
      b[k] = 255 - 255.f * i / kMR;
    }
  }
};

const Wheel& wheel() {
  static const Wheel w;
  return w;
}

}  // namespace

void flow_color(double u, double v, uint8_t rgb[3]) {
  const Wheel& w = wheel();
  const double rad = std::sqrt(u * u + v * v);
  const double a = std::atan2(-v, -u) / M_PI;            // (-1, 1]
  const double fk = (a + 1.0) / 2.0 * (kWheelSize - 1);  // [0, size-1]
  const int k0 = static_cast<int>(fk);
  const int k1 = (k0 + 1) % kWheelSize;
  const double f = fk - k0;
  const float* chans[3] = {w.r, w.g, w.b};
  for (int c = 0; c < 3; ++c) {
    double col = ((1.0 - f) * chans[c][k0] + f * chans[c][k1]) / 255.0;
    if (rad <= 1.0)
      col = 1.0 - rad * (1.0 - col);  // saturate toward white at the center
    else
      col *= 0.75;  // out of range
    rgb[c] = static_cast<uint8_t>(std::clamp(255.0 * col + 0.5, 0.0, 255.0));
  }
}

std::vector<uint8_t> flow_to_rgb(const FlowField& flow, double vmax) {
  double scale = vmax;
  if (scale <= 0.0) {
    for (size_t i = 0; i < flow.mask.size(); ++i)
      if (flow.mask[i])
        scale = std::max(scale, static_cast<double>(std::hypot(flow.u[i], flow.v[i])));
    if (scale <= 0.0) scale = 1.0;
  }
  std::vector<uint8_t> rgb(flow.mask.size() * 3, 0);
  for (size_t i = 0; i < flow.mask.size(); ++i) {
    if (!flow.mask[i]) continue;  // invalid stays black
    flow_color(flow.u[i] / scale, flow.v[i] / scale, &rgb[3 * i]);
  }
  return rgb;
}

void write_flow_png(const FlowField& flow, const std::filesystem::path& path, double vmax) {
  write_png_rgb(path, flow.width, flow.height, flow_to_rgb(flow, vmax));
}

}  // namespace idflow
