#include "idflow/events.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "idflow/error.hpp"

namespace idflow {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Little-endian scalar serialization, independent of host struct layout.
template <typename T>
void put_le(unsigned char* dst, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<unsigned char>((static_cast<uint64_t>(v) >> (8 * i)) & 0xff);
}

template <typename T>
T get_le(const unsigned char* src) {
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<uint64_t>(src[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void EventWindow::validate() const {
  if (t_begin >= t_end)
    throw Error(ErrorKind::Validation, "event window requires t_begin < t_end");
  uint64_t prev_t = t_begin;
  for (size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.t < t_begin || e.t > t_end)
      throw Error(ErrorKind::Validation,
                  "event " + std::to_string(i) + " timestamp outside window");
    if (e.t < prev_t)
      throw Error(ErrorKind::Validation, "event " + std::to_string(i) + " breaks timestamp order");
    if (e.x >= width || e.y >= height)
      throw Error(ErrorKind::Validation,
                  "event " + std::to_string(i) + " coordinate out of bounds");
    if (e.p != 1 && e.p != -1)
      throw Error(ErrorKind::Validation, "event " + std::to_string(i) + " polarity not in {+1,-1}");
    prev_t = e.t;
  }
}

EventWindow read_events(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());

  unsigned char header[kEvt1HeaderBytes];
  if (std::fread(header, 1, sizeof(header), f.get()) != sizeof(header))
    throw Error(ErrorKind::Format, path.string() + ": truncated header");
  if (std::memcmp(header, "EVT1", 4) != 0)
    throw Error(ErrorKind::Format, path.string() + ": bad magic (expected EVT1)");

  EventWindow w;
  w.height = get_le<uint16_t>(header + 4);
  w.width = get_le<uint16_t>(header + 6);
  w.t_begin = get_le<uint64_t>(header + 8);
  w.t_end = get_le<uint64_t>(header + 16);
  uint32_t count = get_le<uint32_t>(header + 24);
  if (w.t_begin >= w.t_end)
    throw Error(ErrorKind::Format, path.string() + ": header requires t_begin < t_end");

  w.events.resize(count);
  std::vector<unsigned char> buf(kEvt1RecordBytes);
  for (uint32_t i = 0; i < count; ++i) {
    if (std::fread(buf.data(), 1, kEvt1RecordBytes, f.get()) != kEvt1RecordBytes)
      throw Error(ErrorKind::Format,
                  path.string() + ": truncated record " + std::to_string(i));
    Event& e = w.events[i];
    e.t = get_le<uint64_t>(buf.data());
    e.x = get_le<uint16_t>(buf.data() + 8);
    e.y = get_le<uint16_t>(buf.data() + 10);
    e.p = static_cast<int8_t>(buf[12]);
  }
  // trailing bytes mean the header count lied
  unsigned char probe;
  if (std::fread(&probe, 1, 1, f.get()) == 1)
    throw Error(ErrorKind::Format, path.string() + ": trailing bytes after declared records");

  try {
    w.validate();
  } catch (const Error& e) {
    if (std::string(e.what()).find("coordinate") != std::string::npos ||
        std::string(e.what()).find("polarity") != std::string::npos)
      throw Error(ErrorKind::Validation, path.string() + ": " + e.what());
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
  return w;
}

void write_events(const EventWindow& w, const std::filesystem::path& path) {
  w.validate();
  if (w.events.size() > UINT32_MAX)
    throw Error(ErrorKind::Contract, "too many events for EVT1 container");

  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");

  unsigned char header[kEvt1HeaderBytes];
  std::memcpy(header, "EVT1", 4);
  put_le<uint16_t>(header + 4, w.height);
  put_le<uint16_t>(header + 6, w.width);
  put_le<uint64_t>(header + 8, w.t_begin);
  put_le<uint64_t>(header + 16, w.t_end);
  put_le<uint32_t>(header + 24, static_cast<uint32_t>(w.events.size()));
  if (std::fwrite(header, 1, sizeof(header), f.get()) != sizeof(header))
    throw Error(ErrorKind::Io, "write failed: " + path.string());

  std::vector<unsigned char> buf(kEvt1RecordBytes);
  for (const Event& e : w.events) {
    put_le<uint64_t>(buf.data(), e.t);
    put_le<uint16_t>(buf.data() + 8, e.x);
    put_le<uint16_t>(buf.data() + 10, e.y);
    buf[12] = static_cast<unsigned char>(e.p);
    if (std::fwrite(buf.data(), 1, kEvt1RecordBytes, f.get()) != kEvt1RecordBytes)
      throw Error(ErrorKind::Io, "write failed: " + path.string());
  }
}

double normalized_time(uint64_t t, const EventWindow& w, int bins) {
  if (bins < 2) throw Error(ErrorKind::Domain, "normalized_time requires bins >= 2");
  if (t < w.t_begin || t > w.t_end)
    throw Error(ErrorKind::Domain, "timestamp outside [t_begin, t_end]");
  return static_cast<double>(bins - 1) * static_cast<double>(t - w.t_begin) / w.duration_us();
}

VoxelGrid build_voxel_grid(const EventWindow& w, int bins) {
  if (bins < 2) throw Error(ErrorKind::Domain, "build_voxel_grid requires bins >= 2");
  w.validate();

  VoxelGrid g;
  g.bins = bins;
  g.height = w.height;
  g.width = w.width;
  g.t_begin = w.t_begin;
  g.t_end = w.t_end;

  const size_t plane = static_cast<size_t>(g.height) * g.width;
  std::vector<double> acc(plane * bins, 0.0);
  const double scale = static_cast<double>(bins - 1) / w.duration_us();
  for (const Event& e : w.events) {
    const double ts = scale * static_cast<double>(e.t - w.t_begin);
    const int b0 = static_cast<int>(ts);  // ts in [0, B-1]
    const double frac = ts - b0;
    const size_t px = static_cast<size_t>(e.y) * g.width + e.x;
    acc[b0 * plane + px] += e.p * (1.0 - frac);
    if (frac > 0.0 && b0 + 1 < bins) acc[(b0 + 1) * plane + px] += e.p * frac;
  }
  g.data.resize(acc.size());
  for (size_t i = 0; i < acc.size(); ++i) g.data[i] = static_cast<float>(acc[i]);
  return g;
}

}  // namespace idflow
