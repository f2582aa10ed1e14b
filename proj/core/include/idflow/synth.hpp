#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "idflow/events.hpp"
#include "idflow/flow.hpp"

namespace idflow {

/// Moving-dot scene with exact per-pixel ground-truth flow. Dots are bright
/// disks translating at constant velocity; their rims emit events at a
/// configurable rate, positive on the leading edge and negative on the
/// trailing edge.
struct SceneSpec {
  int height = 128;
  int width = 128;
  int dot_count = 20;
  double dot_radius = 4.0;

  enum class Motion { kConstant, kAffine, kPerDotRandom };
  Motion motion = Motion::kConstant;
  double u = 0.0, v = 0.0;  // constant displacement, px per window
  // velocity(x, y) = (a x + b y + c, d x + e y + f), sampled at each dot's
  // initial center (dots still translate rigidly, keeping the GT exact)
  std::array<double, 6> affine{0, 0, 0, 0, 0, 0};
  double rand_min_mag = 1.0, rand_max_mag = 6.0;  // per-dot random speeds

  uint64_t duration_us = 100000;  // one window
  double events_per_px = 3.0;     // rim events per boundary pixel per px traversed
  double noise_rate = 0.0;        // uniform noise events per pixel per window
  uint64_t seed = 0;
  bool dense_gt = false;  // constant motion only: fill flow values everywhere

  void validate() const;
};

std::pair<EventWindow, FlowField> generate(const SceneSpec& spec);

/// Consecutive windows with continuous dot trajectories; one GT flow per
/// window, defined at that window's t_begin.
std::vector<std::pair<EventWindow, FlowField>> generate_sequence(const SceneSpec& spec, int steps);

/// Dot states are exposed for tests that need the exact geometry.
struct DotState {
  double cx, cy;  // center at the start of the sequence
  double vu, vv;  // displacement per window
};
std::vector<DotState> scene_dots(const SceneSpec& spec, int steps);

}  // namespace idflow
