#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace idflow {

/// Single-channel float image (row-major).
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0.f) {}
  float at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  float& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
};

// Binary (P5) 8-bit PGM.
void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<uint8_t>& gray);
std::vector<uint8_t> read_pgm(const std::filesystem::path& path, int* width, int* height);

/// Min-max normalizes to [0,255]; a constant image maps to 0.
std::vector<uint8_t> normalize_to_bytes(const std::vector<float>& values);

void write_image_pgm(const std::filesystem::path& path, const Image& img);

// 8-bit RGB PNG (zlib-compressed, no interlacing).
void write_png_rgb(const std::filesystem::path& path, int width, int height,
                   const std::vector<uint8_t>& rgb);

}  // namespace idflow
