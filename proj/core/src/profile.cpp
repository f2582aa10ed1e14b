#include "idflow/profile.hpp"

#include <algorithm>

#include "idflow/error.hpp"

namespace idflow {
namespace {

struct LayerDims {
  int64_t in_elems, out_elems, macs, params;
  int out_h, out_w;
};

LayerDims layer_dims(const ConvLayerSpec& s, int in_h, int in_w) {
  LayerDims d;
  const int pad = (s.kernel - 1) / 2;
  d.out_h = (in_h + 2 * pad - s.kernel) / s.stride + 1;
  d.out_w = (in_w + 2 * pad - s.kernel) / s.stride + 1;
  d.in_elems = static_cast<int64_t>(s.in_ch) * in_h * in_w;
  d.out_elems = static_cast<int64_t>(s.out_ch) * d.out_h * d.out_w;
  d.macs = static_cast<int64_t>(s.kernel) * s.kernel * s.in_ch * s.out_ch * d.out_h * d.out_w;
  d.params = static_cast<int64_t>(s.kernel) * s.kernel * s.in_ch * s.out_ch + s.out_ch;
  return d;
}

int64_t stack_macs(const std::vector<ConvLayerSpec>& specs, int h, int w, int64_t* live_peak) {
  int64_t total = 0;
  for (const auto& s : specs) {
    LayerDims d = layer_dims(s, h, w);
    total += d.macs;
    if (live_peak) *live_peak = std::max(*live_peak, d.in_elems + d.out_elems);
    h = d.out_h;
    w = d.out_w;
  }
  return total;
}

int64_t stack_params(const std::vector<ConvLayerSpec>& specs) {
  int64_t total = 0;
  for (const auto& s : specs) total += layer_dims(s, 1, 1).params;
  return total;
}

// One readout head: two convs at 1/8 resolution, bilinear upsample to full
// resolution (4 MACs per output scalar) plus the x8 scaling (1 per scalar).
int64_t head_macs(const NetworkConfig& cfg, int height, int width) {
  const int hs = height / cfg.downsample, ws = width / cfg.downsample;
  int64_t total = stack_macs(head_layers("head", cfg.channels), hs, ws, nullptr);
  total += static_cast<int64_t>(2) * height * width * 4;  // upsample
  total += static_cast<int64_t>(2) * height * width;      // scale
  return total;
}

int64_t model_param_count(const NetworkConfig& cfg) {
  int64_t total = stack_params(encoder_layers("enc", 1, cfg.channels));
  total += stack_params(gru_layers("gru", cfg.channels));
  total += stack_params(head_layers("head", cfg.channels));
  if (cfg.future_head) total += stack_params(head_layers("future", cfg.channels));
  if (cfg.wsm) total += stack_params(encoder_layers("wsm", 2, cfg.channels));
  return total;
}

// Largest transient activation set (scalar count) along the forward schedule.
int64_t peak_live_elems(const NetworkConfig& cfg, int height, int width) {
  const int hs = height / cfg.downsample, ws = width / cfg.downsample;
  const int64_t state = static_cast<int64_t>(cfg.channels) * hs * ws;

  int64_t peak = 0;
  // encoder layers run with the previous RNN state held
  int h = height, w = width;
  for (const auto& s : encoder_layers("enc", 1, cfg.channels)) {
    LayerDims d = layer_dims(s, h, w);
    peak = std::max(peak, d.in_elems + d.out_elems + state);
    h = d.out_h;
    w = d.out_w;
  }
  // ConvGRU phases: the widest holds concat input + gate outputs + h + x
  peak = std::max(peak, 6 * state);
  // WSM runs with no state held
  if (cfg.wsm) {
    int64_t wsm_live = 0;
    stack_macs(encoder_layers("wsm", 2, cfg.channels), height, width, &wsm_live);
    peak = std::max(peak, wsm_live);
  }
  // readout heads hold the state
  int64_t head_live = 0;
  stack_macs(head_layers("head", cfg.channels), hs, ws, &head_live);
  peak = std::max(peak, head_live + state);
  return peak;
}

CostReport base_report(const NetworkConfig& cfg, int height, int width) {
  cfg.validate();
  cfg.validate_resolution(height, width);
  CostReport r;
  r.param_count = model_param_count(cfg);
  const int64_t grid = static_cast<int64_t>(cfg.bins) * height * width;
  const int64_t flow_io = 3 * static_cast<int64_t>(2) * height * width;
  r.peak_memory = 4 * (r.param_count + grid + flow_io + peak_live_elems(cfg, height, width));
  return r;
}

}  // namespace

int64_t conv_macs(const ConvLayerSpec& spec, int in_h, int in_w) {
  return layer_dims(spec, in_h, in_w).macs;
}

MacParts mac_parts(const NetworkConfig& cfg, int height, int width) {
  cfg.validate();
  cfg.validate_resolution(height, width);
  const int hs = height / cfg.downsample, ws = width / cfg.downsample;
  MacParts p;
  p.encoder_per_bin = stack_macs(encoder_layers("enc", 1, cfg.channels), height, width, nullptr);
  p.gru_per_bin = stack_macs(gru_layers("gru", cfg.channels), hs, ws, nullptr);
  p.head = head_macs(cfg, height, width);
  p.wsm = cfg.wsm ? stack_macs(encoder_layers("wsm", 2, cfg.channels), height, width, nullptr) : 0;
  p.bins = cfg.bins;
  p.heads_per_pass = cfg.future_head ? 2 : 1;
  return p;
}

CostReport count_macs(const NetworkConfig& cfg, const IdConfig& scheme, int height, int width) {
  if (scheme.iterations < 1) throw Error(ErrorKind::Domain, "count_macs: iterations must be >= 1");
  CostReport r = base_report(cfg, height, width);
  const MacParts p = mac_parts(cfg, height, width);
  // WSM warm-starts iterations 2..N only
  r.macs = scheme.iterations * p.extract_pass() +
           static_cast<int64_t>(scheme.iterations - 1) * (scheme.wsm_enabled ? p.wsm : 0);
  return r;
}

CostReport count_macs(const NetworkConfig& cfg, const TidConfig& scheme, int height, int width) {
  scheme.validate();
  CostReport r = base_report(cfg, height, width);
  const MacParts p = mac_parts(cfg, height, width);
  // one extractor pass and one warm start per streaming step
  r.macs = p.extract_pass() + p.wsm;
  return r;
}

}  // namespace idflow
