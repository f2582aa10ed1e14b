#include "idflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "idflow/error.hpp"
#include "idflow/image_io.hpp"

namespace idflow {
namespace {

constexpr float kFloMagic = 202021.25f;  // "PIEH"

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

FlowField FlowField::zeros(int height, int width, bool valid) {
  FlowField f;
  f.height = height;
  f.width = width;
  size_t n = static_cast<size_t>(height) * width;
  f.u.assign(n, 0.f);
  f.v.assign(n, 0.f);
  f.mask.assign(n, valid ? 1 : 0);
  return f;
}

FlowField FlowField::uniform(int height, int width, float fu, float fv) {
  FlowField f = zeros(height, width);
  std::fill(f.u.begin(), f.u.end(), fu);
  std::fill(f.v.begin(), f.v.end(), fv);
  return f;
}

int64_t FlowField::valid_count() const {
  int64_t n = 0;
  for (uint8_t m : mask) n += (m != 0);
  return n;
}

void FlowField::sample(double x, double y, double* out_u, double* out_v) const {
  // border clamp, then bilinear
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  int x1 = std::min(x0 + 1, width - 1);
  int y1 = std::min(y0 + 1, height - 1);
  double fx = x - x0;
  double fy = y - y0;
  double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy);
  double w01 = (1 - fx) * fy, w11 = fx * fy;
  *out_u = w00 * u_at(y0, x0) + w10 * u_at(y0, x1) + w01 * u_at(y1, x0) + w11 * u_at(y1, x1);
  *out_v = w00 * v_at(y0, x0) + w10 * v_at(y0, x1) + w01 * v_at(y1, x0) + w11 * v_at(y1, x1);
}

void FlowField::validate() const {
  size_t n = static_cast<size_t>(height) * width;
  if (u.size() != n || v.size() != n || mask.size() != n)
    throw Error(ErrorKind::Shape, "flow field component sizes disagree with resolution");
  for (size_t i = 0; i < n; ++i)
    if (mask[i] && (!std::isfinite(u[i]) || !std::isfinite(v[i])))
      throw Error(ErrorKind::Numeric, "non-finite flow at a valid pixel");
}

std::filesystem::path flow_mask_path(const std::filesystem::path& flo_path) {
  std::filesystem::path p = flo_path;
  p.replace_extension(".pgm");
  return p;
}

void write_flo(const FlowField& f, const std::filesystem::path& path, bool with_mask) {
  f.validate();
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");

  int32_t w = f.width, h = f.height;
  if (std::fwrite(&kFloMagic, 4, 1, fp.get()) != 1 || std::fwrite(&w, 4, 1, fp.get()) != 1 ||
      std::fwrite(&h, 4, 1, fp.get()) != 1)
    throw Error(ErrorKind::Io, "write failed: " + path.string());
  std::vector<float> row(static_cast<size_t>(f.width) * 2);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      row[2 * x] = f.u_at(y, x);
      row[2 * x + 1] = f.v_at(y, x);
    }
    if (std::fwrite(row.data(), 4, row.size(), fp.get()) != row.size())
      throw Error(ErrorKind::Io, "write failed: " + path.string());
  }
  fp.reset();

  if (with_mask) {
    std::vector<uint8_t> m(f.mask.size());
    for (size_t i = 0; i < m.size(); ++i) m[i] = f.mask[i] ? 255 : 0;
    write_pgm(flow_mask_path(path), f.width, f.height, m);
  }
}

FlowField read_flo(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path.string());

  float magic = 0;
  int32_t w = 0, h = 0;
  if (std::fread(&magic, 4, 1, fp.get()) != 1 || std::fread(&w, 4, 1, fp.get()) != 1 ||
      std::fread(&h, 4, 1, fp.get()) != 1)
    throw Error(ErrorKind::Format, path.string() + ": truncated .flo header");
  if (magic != kFloMagic)
    throw Error(ErrorKind::Format, path.string() + ": bad .flo magic");
  if (w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16)
    throw Error(ErrorKind::Format, path.string() + ": implausible .flo dimensions");

  FlowField f = FlowField::zeros(h, w);
  std::vector<float> row(static_cast<size_t>(w) * 2);
  for (int y = 0; y < h; ++y) {
    if (std::fread(row.data(), 4, row.size(), fp.get()) != row.size())
      throw Error(ErrorKind::Format, path.string() + ": truncated .flo data");
    for (int x = 0; x < w; ++x) {
      f.u[f.idx(y, x)] = row[2 * x];
      f.v[f.idx(y, x)] = row[2 * x + 1];
    }
  }

  auto mask_path = flow_mask_path(path);
  if (std::filesystem::exists(mask_path)) {
    int mw = 0, mh = 0;
    std::vector<uint8_t> m = read_pgm(mask_path, &mw, &mh);
    if (mw != w || mh != h)
      throw Error(ErrorKind::Format, mask_path.string() + ": mask resolution mismatch");
    for (size_t i = 0; i < m.size(); ++i) f.mask[i] = m[i] >= 128 ? 1 : 0;
  }
  return f;
}

}  // namespace idflow
