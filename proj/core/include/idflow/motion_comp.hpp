#pragma once

#include <cstdint>
#include <vector>

#include "idflow/events.hpp"
#include "idflow/flow.hpp"
#include "idflow/image_io.hpp"

namespace idflow {

/// An event transported along a flow field; coordinates are real-valued and
/// may land outside the frame (kept, not clamped).
struct WarpedEvent {
  uint64_t t = 0;
  float x = 0.f;
  float y = 0.f;
  int8_t p = 1;
};

struct WarpedEvents {
  std::vector<WarpedEvent> events;
  uint64_t t_ref = 0;
  uint64_t t_begin = 0;  // source window, needed to re-bin
  uint64_t t_end = 0;
  int height = 0;
  int width = 0;

  double duration_us() const { return static_cast<double>(t_end - t_begin); }
};

/// Raw events as warped events with identity coordinates (reference t_begin).
WarpedEvents to_warped(const EventWindow& w);

// Transport each event's coordinate along `flow` to t_ref:
//   x' = x + (t_ref - t_i)/(t_end - t_begin) * flow(x)
// with flow in pixels per full window and bilinear sampling at the event's
// current coordinate (border-clamped). Composable: warping an already-warped
// set by a residual flow displaces the current coordinates further.
WarpedEvents deblur_events(const EventWindow& w, const FlowField& flow, uint64_t t_ref);
WarpedEvents deblur_events(const WarpedEvents& w, const FlowField& flow, uint64_t t_ref);

/// Bilinear splat in x, y and in time (8 corners); out-of-frame events keep
/// only their in-bounds corner weights. 64-bit accumulation.
VoxelGrid rebin(const WarpedEvents& w, int bins, int height, int width);

/// Image of warped events: per-pixel bilinear accumulation of |p|.
Image iwe(const WarpedEvents& w, int height, int width);

/// Population variance of pixel values; the sharpness objective.
double contrast_variance(const Image& img);

}  // namespace idflow
