#include "idflow/motion_comp.hpp"

#include <cmath>

#include "idflow/error.hpp"

namespace idflow {
namespace {

void check_resolution(int fh, int fw, int h, int w) {
  if (fh != h || fw != w)
    throw Error(ErrorKind::Shape, "flow resolution does not match event resolution");
}

WarpedEvents warp(WarpedEvents in, const FlowField& flow, uint64_t t_ref) {
  check_resolution(flow.height, flow.width, in.height, in.width);
  if (t_ref < in.t_begin || t_ref > in.t_end)
    throw Error(ErrorKind::Domain, "t_ref outside the event window");

  const double inv_T = 1.0 / in.duration_us();
  const double ref_s = static_cast<double>(t_ref - in.t_begin) * inv_T;
  for (WarpedEvent& e : in.events) {
    const double s = static_cast<double>(e.t - in.t_begin) * inv_T;
    double fu, fv;
    flow.sample(e.x, e.y, &fu, &fv);
    const double dt = ref_s - s;
    e.x = static_cast<float>(e.x + dt * fu);
    e.y = static_cast<float>(e.y + dt * fv);
  }
  in.t_ref = t_ref;
  return in;
}

}  // namespace

WarpedEvents to_warped(const EventWindow& w) {
  WarpedEvents out;
  out.t_ref = w.t_begin;
  out.t_begin = w.t_begin;
  out.t_end = w.t_end;
  out.height = w.height;
  out.width = w.width;
  out.events.reserve(w.events.size());
  for (const Event& e : w.events)
    out.events.push_back({e.t, static_cast<float>(e.x), static_cast<float>(e.y), e.p});
  return out;
}

WarpedEvents deblur_events(const EventWindow& w, const FlowField& flow, uint64_t t_ref) {
  return warp(to_warped(w), flow, t_ref);
}

WarpedEvents deblur_events(const WarpedEvents& w, const FlowField& flow, uint64_t t_ref) {
  return warp(w, flow, t_ref);
}

VoxelGrid rebin(const WarpedEvents& w, int bins, int height, int width) {
  if (bins < 2) throw Error(ErrorKind::Domain, "rebin requires bins >= 2");
  VoxelGrid g;
  g.bins = bins;
  g.height = height;
  g.width = width;
  g.t_begin = w.t_begin;
  g.t_end = w.t_end;

  const size_t plane = static_cast<size_t>(height) * width;
  std::vector<double> acc(plane * bins, 0.0);
  const double tscale = static_cast<double>(bins - 1) / w.duration_us();
  for (const WarpedEvent& e : w.events) {
    const double ts = tscale * static_cast<double>(e.t - w.t_begin);
    const int b0 = static_cast<int>(ts);
    const double tf = ts - b0;

    const int x0 = static_cast<int>(std::floor(e.x));
    const int y0 = static_cast<int>(std::floor(e.y));
    const double fx = e.x - x0;
    const double fy = e.y - y0;

    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    const double wt[2] = {1.0 - tf, tf};
    for (int bi = 0; bi < 2; ++bi) {
      if (wt[bi] == 0.0) continue;
      const int b = b0 + bi;
      if (b < 0 || b >= bins) continue;
      for (int yi = 0; yi < 2; ++yi) {
        if (wy[yi] == 0.0) continue;
        const int y = y0 + yi;
        if (y < 0 || y >= height) continue;
        for (int xi = 0; xi < 2; ++xi) {
          if (wx[xi] == 0.0) continue;
          const int x = x0 + xi;
          if (x < 0 || x >= width) continue;
          acc[b * plane + static_cast<size_t>(y) * width + x] += e.p * wt[bi] * wy[yi] * wx[xi];
        }
      }
    }
  }
  g.data.resize(acc.size());
  for (size_t i = 0; i < acc.size(); ++i) g.data[i] = static_cast<float>(acc[i]);
  return g;
}

Image iwe(const WarpedEvents& w, int height, int width) {
  Image img(height, width);
  std::vector<double> acc(img.data.size(), 0.0);
  for (const WarpedEvent& e : w.events) {
    const int x0 = static_cast<int>(std::floor(e.x));
    const int y0 = static_cast<int>(std::floor(e.y));
    const double fx = e.x - x0;
    const double fy = e.y - y0;
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    for (int yi = 0; yi < 2; ++yi) {
      if (wy[yi] == 0.0) continue;
      const int y = y0 + yi;
      if (y < 0 || y >= height) continue;
      for (int xi = 0; xi < 2; ++xi) {
        if (wx[xi] == 0.0) continue;
        const int x = x0 + xi;
        if (x < 0 || x >= width) continue;
        acc[static_cast<size_t>(y) * width + x] += wy[yi] * wx[xi];  // |p| = 1
      }
    }
  }
  for (size_t i = 0; i < acc.size(); ++i) img.data[i] = static_cast<float>(acc[i]);
  return img;
}

double contrast_variance(const Image& img) {
  if (img.data.empty()) throw Error(ErrorKind::Domain, "contrast_variance of an empty image");
  double mean = 0.0;
  for (float v : img.data) mean += v;
  mean /= static_cast<double>(img.data.size());
  double var = 0.0;
  for (float v : img.data) {
    const double d = v - mean;
    var += d * d;
  }
  return var / static_cast<double>(img.data.size());
}

}  // namespace idflow
