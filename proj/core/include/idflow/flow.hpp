#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace idflow {

/// Dense per-pixel 2D displacement in pixels over one event window, defined at
/// t_begin, with a validity mask (1 = valid).
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<float> u;
  std::vector<float> v;
  std::vector<uint8_t> mask;

  static FlowField zeros(int height, int width, bool valid = true);
  static FlowField uniform(int height, int width, float fu, float fv);

  size_t idx(int y, int x) const { return static_cast<size_t>(y) * width + x; }
  float u_at(int y, int x) const { return u[idx(y, x)]; }
  float v_at(int y, int x) const { return v[idx(y, x)]; }
  bool valid_at(int y, int x) const { return mask[idx(y, x)] != 0; }

  int64_t valid_count() const;

  /// Bilinear sample of (u, v) at a real coordinate; out-of-frame coordinates
  /// clamp to the border. The mask is not consulted.
  void sample(double x, double y, double* out_u, double* out_v) const;

  void validate() const;
};

// Middlebury ".flo" container (magic float 202021.25, i32 width, i32 height,
// interleaved float32 u,v row-major). The validity mask travels alongside as
// an 8-bit binary PGM (255 = valid) with the same stem and ".pgm" extension.
std::filesystem::path flow_mask_path(const std::filesystem::path& flo_path);

void write_flo(const FlowField& f, const std::filesystem::path& path, bool with_mask = true);

/// Reads the .flo file; if the sibling mask PGM is missing, everything is valid.
FlowField read_flo(const std::filesystem::path& path);

}  // namespace idflow
