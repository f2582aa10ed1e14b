#pragma once

#include <utility>

#include "idflow/events.hpp"
#include "idflow/flow.hpp"
#include "idflow/rng.hpp"

namespace idflow {

/// Crop rectangle plus flip flags; crop_h/crop_w of 0 keep the full frame.
/// Crop is applied first, flips after.
struct AugmentSpec {
  int crop_x = 0;
  int crop_y = 0;
  int crop_h = 0;
  int crop_w = 0;
  bool hflip = false;
  bool vflip = false;
};

/// Crops/flips grid and flow consistently; horizontal flip negates u,
/// vertical flip negates v, and the mask transforms identically.
std::pair<VoxelGrid, FlowField> augment(const VoxelGrid& grid, const FlowField& flow,
                                        const AugmentSpec& spec);

/// The same transform applied to the raw events (events outside the crop are
/// dropped); build_voxel_grid of the result equals augment() of the grid.
std::pair<EventWindow, FlowField> augment_window(const EventWindow& w, const FlowField& flow,
                                                 const AugmentSpec& spec);

/// Random crop position + flip coin tosses with the configured probabilities.
AugmentSpec sample_augment(Rng& rng, int height, int width, int crop_h, int crop_w,
                           double p_hflip, double p_vflip);

}  // namespace idflow
