#pragma once

#include <vector>

#include "idflow/events.hpp"
#include "idflow/flow.hpp"
#include "idflow/idnet.hpp"

namespace idflow {

/// Exhaustive search box for a uniform flow: u,v in [-radius, radius] with
/// the given step.
struct CmaxSearch {
  double radius = 8.0;
  double step = 0.25;
  // Each successive extractor call shrinks the radius by this factor (the
  // residual left for later iterations is smaller); 1.0 disables shrinking.
  double shrink = 0.5;
  double min_radius = 0.5;
};

struct CmaxResult {
  FlowField flow;
  bool empty_input = false;  // warning: no event mass, zero flow returned
};

/// Grid search over uniform flows maximizing the contrast variance of the
/// image of warped events. The grid's cells act as time-quantized events at
/// their bin's normalized timestamp. Ties prefer the smaller flow magnitude,
/// then lexicographic (u, v).
CmaxResult cmax_extract(const VoxelGrid& grid, const CmaxSearch& search);

/// Uniform-flow contrast-maximization as a ResidualFlowExtractor so the
/// iterative schemes can run without any learned weights.
class CmaxExtractor final : public ResidualFlowExtractor {
 public:
  explicit CmaxExtractor(CmaxSearch search) : search_(search) {}

  ExtractOutT<float> extract(const VoxelGrid& grid, const Tensor& state) override;
  Tensor warm_start(const Tensor& flow) override {
    (void)flow;
    return Tensor::zeros({1});
  }
  Tensor initial_state(int height, int width) const override {
    (void)height;
    (void)width;
    return Tensor::zeros({1});
  }

  void reset() { calls_ = 0; }
  bool last_empty_input() const { return last_empty_; }

 private:
  CmaxSearch search_;
  int calls_ = 0;
  bool last_empty_ = false;
};

}  // namespace idflow
