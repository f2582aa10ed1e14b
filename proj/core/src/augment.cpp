#include "idflow/augment.hpp"

#include <algorithm>

#include "idflow/error.hpp"

namespace idflow {
namespace {

struct Rect {
  int x0, y0, h, w;
};

Rect resolve_crop(const AugmentSpec& s, int height, int width) {
  Rect r{s.crop_x, s.crop_y, s.crop_h ? s.crop_h : height, s.crop_w ? s.crop_w : width};
  if (r.h <= 0 || r.w <= 0 || r.h > height || r.w > width)
    throw Error(ErrorKind::Domain, "crop larger than input or empty");
  if (r.x0 < 0 || r.y0 < 0 || r.x0 + r.w > width || r.y0 + r.h > height)
    throw Error(ErrorKind::Domain, "crop rectangle outside the frame");
  return r;
}

}  // namespace

std::pair<VoxelGrid, FlowField> augment(const VoxelGrid& grid, const FlowField& flow,
                                        const AugmentSpec& spec) {
  if (grid.height != flow.height || grid.width != flow.width)
    throw Error(ErrorKind::Shape, "grid and flow resolution disagree");
  const Rect r = resolve_crop(spec, grid.height, grid.width);

  VoxelGrid out;
  out.bins = grid.bins;
  out.height = r.h;
  out.width = r.w;
  out.t_begin = grid.t_begin;
  out.t_end = grid.t_end;
  out.data.resize(static_cast<size_t>(grid.bins) * r.h * r.w);

  FlowField of = FlowField::zeros(r.h, r.w);

  for (int y = 0; y < r.h; ++y) {
    const int sy = spec.vflip ? r.y0 + (r.h - 1 - y) : r.y0 + y;
    for (int x = 0; x < r.w; ++x) {
      const int sx = spec.hflip ? r.x0 + (r.w - 1 - x) : r.x0 + x;
      for (int b = 0; b < grid.bins; ++b)
        out.data[(static_cast<size_t>(b) * r.h + y) * r.w + x] = grid.at(b, sy, sx);
      const size_t di = of.idx(y, x);
      const size_t si = flow.idx(sy, sx);
      of.u[di] = spec.hflip ? -flow.u[si] : flow.u[si];
      of.v[di] = spec.vflip ? -flow.v[si] : flow.v[si];
      of.mask[di] = flow.mask[si];
    }
  }
  return {std::move(out), std::move(of)};
}

std::pair<EventWindow, FlowField> augment_window(const EventWindow& w, const FlowField& flow,
                                                 const AugmentSpec& spec) {
  if (w.height != flow.height || w.width != flow.width)
    throw Error(ErrorKind::Shape, "window and flow resolution disagree");
  const Rect r = resolve_crop(spec, w.height, w.width);

  EventWindow out;
  out.t_begin = w.t_begin;
  out.t_end = w.t_end;
  out.height = static_cast<uint16_t>(r.h);
  out.width = static_cast<uint16_t>(r.w);
  out.events.reserve(w.events.size());
  for (Event e : w.events) {
    if (e.x < r.x0 || e.x >= r.x0 + r.w || e.y < r.y0 || e.y >= r.y0 + r.h) continue;
    int x = e.x - r.x0;
    int y = e.y - r.y0;
    if (spec.hflip) x = r.w - 1 - x;
    if (spec.vflip) y = r.h - 1 - y;
    e.x = static_cast<uint16_t>(x);
    e.y = static_cast<uint16_t>(y);
    out.events.push_back(e);
  }

  // Same pixel transform as the grid path.
  FlowField of = FlowField::zeros(r.h, r.w);
  for (int y = 0; y < r.h; ++y) {
    const int sy = spec.vflip ? r.y0 + (r.h - 1 - y) : r.y0 + y;
    for (int x = 0; x < r.w; ++x) {
      const int sx = spec.hflip ? r.x0 + (r.w - 1 - x) : r.x0 + x;
      const size_t di = of.idx(y, x);
      const size_t si = flow.idx(sy, sx);
      of.u[di] = spec.hflip ? -flow.u[si] : flow.u[si];
      of.v[di] = spec.vflip ? -flow.v[si] : flow.v[si];
      of.mask[di] = flow.mask[si];
    }
  }
  return {std::move(out), std::move(of)};
}

AugmentSpec sample_augment(Rng& rng, int height, int width, int crop_h, int crop_w,
                           double p_hflip, double p_vflip) {
  AugmentSpec s;
  if (crop_h > 0 && crop_w > 0 && (crop_h < height || crop_w < width)) {
    s.crop_h = crop_h;
    s.crop_w = crop_w;
    s.crop_y = static_cast<int>(rng.uniform_int(0, height - crop_h));
    s.crop_x = static_cast<int>(rng.uniform_int(0, width - crop_w));
  }
  s.hflip = rng.bernoulli(p_hflip);
  s.vflip = rng.bernoulli(p_vflip);
  return s;
}

}  // namespace idflow
