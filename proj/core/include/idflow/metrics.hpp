#pragma once

#include <cstdint>
#include <map>

#include "idflow/flow.hpp"

namespace idflow {

struct MetricsReport {
  double epe = 0.0;            // px
  double ae = 0.0;             // degrees
  std::map<int, double> npe;   // n -> % of valid pixels with error > n px
  int64_t valid_count = 0;
};

/// Mean endpoint error over pixels valid in both masks.
double epe(const FlowField& pred, const FlowField& gt);

/// Mean angle between the space-time vectors (u,v,1), in degrees. Defined
/// even for zero flow; note this differs from a pure-2D angle convention.
double ae(const FlowField& pred, const FlowField& gt);

/// Percentage of valid pixels with endpoint error > n (n in {1,2,3}).
double npe(const FlowField& pred, const FlowField& gt, int n);

MetricsReport compute_metrics(const FlowField& pred, const FlowField& gt);

/// Aggregates pixel-level sums so multi-window reports weight by pixel count.
struct MetricsAccumulator {
  double epe_sum = 0.0;
  double ae_sum = 0.0;
  int64_t over[3] = {0, 0, 0};
  int64_t count = 0;

  void add(const FlowField& pred, const FlowField& gt);
  MetricsReport report() const;
};

}  // namespace idflow
