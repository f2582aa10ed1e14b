#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace idflow {

/// One camera event: timestamp in microseconds, pixel location, polarity (+1/-1).
struct Event {
  uint64_t t = 0;
  uint16_t x = 0;
  uint16_t y = 0;
  int8_t p = 1;
};

/// Events of one time window, sorted by timestamp, with the sensor resolution.
struct EventWindow {
  std::vector<Event> events;
  uint64_t t_begin = 0;
  uint64_t t_end = 0;
  uint16_t height = 0;
  uint16_t width = 0;

  double duration_us() const { return static_cast<double>(t_end - t_begin); }

  // Throws Validation/Domain errors when an invariant is broken; `where`
  // prefixes messages so file loaders can report the offending record.
  void validate() const;
};

/// B x H x W event volume with bilinear temporal binning.
struct VoxelGrid {
  int bins = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;  // bins * height * width, bin-major
  uint64_t t_begin = 0;
  uint64_t t_end = 0;

  float at(int b, int y, int x) const {
    return data[(static_cast<size_t>(b) * height + y) * width + x];
  }
  float& at(int b, int y, int x) {
    return data[(static_cast<size_t>(b) * height + y) * width + x];
  }
  const float* bin(int b) const { return data.data() + static_cast<size_t>(b) * height * width; }
};

// Binary "EVT1" container, little-endian:
//   magic "EVT1", u16 height, u16 width, u64 t_begin, u64 t_end, u32 count,
//   then count records of { u64 t, u16 x, u16 y, i8 p } (13 bytes each), sorted by t.
inline constexpr size_t kEvt1HeaderBytes = 28;
inline constexpr size_t kEvt1RecordBytes = 13;

EventWindow read_events(const std::filesystem::path& path);
void write_events(const EventWindow& w, const std::filesystem::path& path);

/// Eq-style normalized timestamp: (B-1) * (t - t_begin) / (t_end - t_begin), in [0, B-1].
double normalized_time(uint64_t t, const EventWindow& w, int bins);

/// Accumulates signed polarities into the two temporally adjacent bins.
/// Accumulation runs in 64-bit and is narrowed to float at the end.
VoxelGrid build_voxel_grid(const EventWindow& w, int bins);

}  // namespace idflow
