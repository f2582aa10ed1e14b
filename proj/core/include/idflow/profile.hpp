#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idflow/idnet.hpp"
#include "idflow/schemes.hpp"

namespace idflow {

/// Analytic inference cost for one flow estimate.
/// macs counts fused multiply-accumulates (k^2*Cin*Cout*Hout*Wout per conv,
/// 4 per bilinearly interpolated output scalar, 1 per scalar scaling);
/// residual additions and nonlinearities are not counted.
/// peak_memory models float32 buffers under greedy reuse along the forward
/// schedule: parameters + voxel grid + three flow-sized I/O buffers + the
/// largest transient activation set. Iterations reuse the same buffers, so
/// the estimate is iteration-count independent.
struct CostReport {
  int64_t macs = 0;
  int64_t peak_memory = 0;  // bytes
  int64_t param_count = 0;
};

int64_t conv_macs(const ConvLayerSpec& spec, int in_h, int in_w);

/// Per-component MAC totals of one extractor pass at the given resolution.
struct MacParts {
  int64_t encoder_per_bin = 0;
  int64_t gru_per_bin = 0;
  int64_t head = 0;      // one readout head incl. upsample+scale
  int64_t wsm = 0;       // one warm-start pass
  int64_t bins = 0;
  int64_t heads_per_pass = 1;

  int64_t extract_pass() const {
    return bins * (encoder_per_bin + gru_per_bin) + heads_per_pass * head;
  }
};

MacParts mac_parts(const NetworkConfig& cfg, int height, int width);

CostReport count_macs(const NetworkConfig& cfg, const IdConfig& scheme, int height, int width);
CostReport count_macs(const NetworkConfig& cfg, const TidConfig& scheme, int height, int width);

}  // namespace idflow
