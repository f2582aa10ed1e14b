#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idflow/events.hpp"
#include "idflow/flow.hpp"
#include "idflow/nn.hpp"
#include "idflow/params.hpp"
#include "idflow/rng.hpp"
#include "idflow/tensor.hpp"

namespace idflow {

/// Model hyperparameters. channels=64 matches the full-scale setup; 32 is the
/// desk-scale default used by the synthetic experiments.
struct NetworkConfig {
  int bins = 15;
  int channels = 64;
  int downsample = 8;  // fixed by the encoder layout
  bool future_head = false;
  bool wsm = true;

  void validate() const;
  void validate_resolution(int height, int width) const;
};

/// One convolution of the model, named so the profiler and the parameter
/// container stay in sync with the actual forward pass.
struct ConvLayerSpec {
  std::string name;
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 3;
  int stride = 1;
  bool relu = true;
  bool residual = false;  // out = relu(conv(x) + x); requires matching shape
};

// Encoder: 5 conv layers, strides (2,1,2,1,2), the two stride-1 layers carry
// residual connections; 1/8 downsampling overall. WSM shares the layout with
// a 2-channel input.
std::vector<ConvLayerSpec> encoder_layers(const std::string& prefix, int in_ch, int channels);
// Flow head: two 3x3 convs (C -> C/2 -> 2), linear output.
std::vector<ConvLayerSpec> head_layers(const std::string& prefix, int channels);
// ConvGRU gates: three (2C -> C) 3x3 convs.
std::vector<ConvLayerSpec> gru_layers(const std::string& prefix, int channels);

template <typename T>
struct ExtractOutT {
  TensorT<T> residual;           // 2 x H x W, full resolution
  TensorT<T> state;              // C x H/8 x W/8
  std::optional<TensorT<T>> future;  // 2 x H x W when the future head exists
};

template <typename T>
TensorT<T> voxel_to_tensor(const VoxelGrid& g, bool requires_grad = false) {
  return TensorT<T>::from_vector({g.bins, g.height, g.width},
                                 std::vector<T>(g.data.begin(), g.data.end()), requires_grad);
}

template <typename T>
TensorT<T> flow_to_tensor(const FlowField& f, bool requires_grad = false) {
  std::vector<T> data;
  data.reserve(f.u.size() * 2);
  data.insert(data.end(), f.u.begin(), f.u.end());
  data.insert(data.end(), f.v.begin(), f.v.end());
  return TensorT<T>::from_vector({2, f.height, f.width}, std::move(data), requires_grad);
}

template <typename T>
FlowField tensor_to_flow(const TensorT<T>& t) {
  if (t.rank() != 3 || t.dim(0) != 2)
    throw Error(ErrorKind::Shape, "flow tensor must be 2 x H x W");
  FlowField f = FlowField::zeros(t.dim(1), t.dim(2));
  const size_t plane = f.u.size();
  for (size_t i = 0; i < plane; ++i) {
    f.u[i] = static_cast<float>(t.values()[i]);
    f.v[i] = static_cast<float>(t.values()[plane + i]);
  }
  return f;
}

/// The IDNet backbone: per-bin encoder, ConvGRU state update over bins,
/// flow readout head(s), and the warm-starting module.
template <typename T>
class IdNetT {
 public:
  IdNetT(NetworkConfig cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    build_params();
    init_params(seed);
  }

  IdNetT(NetworkConfig cfg, ModelParamsT<T> loaded) : cfg_(cfg) {
    cfg_.validate();
    build_params();  // expected architecture
    if (loaded.size() != params_.size())
      throw Error(ErrorKind::Contract, "checkpoint parameter count does not match config");
    for (const auto& [name, t] : params_)
      if (!loaded.contains(name) || loaded.at(name).shape() != t.shape())
        throw Error(ErrorKind::Contract, "checkpoint parameter " + name + " does not match config");
    params_ = std::move(loaded);
    params_.set_requires_grad(true);
  }

  const NetworkConfig& config() const { return cfg_; }
  ModelParamsT<T>& params() { return params_; }
  const ModelParamsT<T>& params() const { return params_; }

  TensorT<T> initial_state(int height, int width) const {
    cfg_.validate_resolution(height, width);
    return TensorT<T>::zeros({cfg_.channels, height / cfg_.downsample, width / cfg_.downsample});
  }

  /// (1,H,W) event bin -> (C,H/8,W/8) features.
  TensorT<T> encoder_forward(const TensorT<T>& bin) const {
    if (bin.rank() != 3 || bin.dim(0) != 1)
      throw Error(ErrorKind::Shape, "encoder_forward expects a (1,H,W) bin");
    cfg_.validate_resolution(bin.dim(1), bin.dim(2));
    return apply_stack(encoder_layers("enc", 1, cfg_.channels), bin);
  }

  /// (2,H,W) flow -> (C,H/8,W/8) initial RNN state; zero when WSM is disabled.
  TensorT<T> wsm_forward(const TensorT<T>& flow) const {
    if (flow.rank() != 3 || flow.dim(0) != 2)
      throw Error(ErrorKind::Shape, "wsm_forward expects a (2,H,W) flow");
    cfg_.validate_resolution(flow.dim(1), flow.dim(2));
    if (!cfg_.wsm) return initial_state(flow.dim(1), flow.dim(2));
    return apply_stack(encoder_layers("wsm", 2, cfg_.channels), flow);
  }

  /// Feeds each bin through the encoder and the ConvGRU in temporal order,
  /// then reads the flow (and optionally the future flow) from the state.
  /// Readouts are upsampled x8 bilinearly with x8 magnitude scaling.
  ExtractOutT<T> rnn_extract(const TensorT<T>& grid, TensorT<T> state) const {
    if (grid.rank() != 3) throw Error(ErrorKind::Shape, "rnn_extract expects a (B,H,W) grid");
    if (grid.dim(0) != cfg_.bins)
      throw Error(ErrorKind::Shape, "grid bin count does not match the model config");
    const int h = grid.dim(1), w = grid.dim(2);
    cfg_.validate_resolution(h, w);
    const int hs = h / cfg_.downsample, ws = w / cfg_.downsample;
    if (state.rank() != 3 || state.dim(0) != cfg_.channels || state.dim(1) != hs ||
        state.dim(2) != ws)
      throw Error(ErrorKind::Shape, "rnn state shape does not match the model config");

    const auto& wz = params_.at("gru.z.w");
    const auto& bz = params_.at("gru.z.b");
    const auto& wr = params_.at("gru.r.w");
    const auto& br = params_.at("gru.r.b");
    const auto& wh = params_.at("gru.h.w");
    const auto& bh = params_.at("gru.h.b");
    for (int b = 0; b < cfg_.bins; ++b) {
      auto features = encoder_forward(slice_channels(grid, b, b + 1));
      state = convgru_step(state, features, wz, bz, wr, br, wh, bh);
    }

    ExtractOutT<T> out;
    out.state = state;
    out.residual = readout(state, "head", h, w);
    if (cfg_.future_head) out.future = readout(state, "future", h, w);
    return out;
  }

  ExtractOutT<T> rnn_extract(const VoxelGrid& grid, TensorT<T> state) const {
    return rnn_extract(voxel_to_tensor<T>(grid), std::move(state));
  }

 private:
  TensorT<T> apply_stack(const std::vector<ConvLayerSpec>& specs, TensorT<T> x) const {
    for (const auto& spec : specs) {
      auto y = conv2d(x, params_.at(spec.name + ".w"), params_.at(spec.name + ".b"), spec.stride,
                      (spec.kernel - 1) / 2);
      if (spec.residual) y = add(y, x);
      x = spec.relu ? relu(y) : y;
    }
    return x;
  }

  TensorT<T> readout(const TensorT<T>& state, const std::string& prefix, int h, int w) const {
    auto lr = apply_stack(head_layers(prefix, cfg_.channels), state);
    return affine(bilinear_resize(lr, h, w), T(8), T(0));
  }

  void build_params() {
    auto add_specs = [&](const std::vector<ConvLayerSpec>& specs) {
      for (const auto& s : specs) {
        params_.add(s.name + ".w",
                    TensorT<T>::zeros({s.out_ch, s.in_ch, s.kernel, s.kernel}, true));
        params_.add(s.name + ".b", TensorT<T>::zeros({s.out_ch}, true));
      }
    };
    add_specs(encoder_layers("enc", 1, cfg_.channels));
    add_specs(gru_layers("gru", cfg_.channels));
    add_specs(head_layers("head", cfg_.channels));
    if (cfg_.future_head) add_specs(head_layers("future", cfg_.channels));
    if (cfg_.wsm) add_specs(encoder_layers("wsm", 2, cfg_.channels));
  }

  void init_params(uint64_t seed) {
    // Kaiming-uniform fan-in for weights, zero biases.
    Rng rng(seed);
    for (auto& [name, t] : params_) {
      if (t.rank() != 4) continue;
      const double fan_in = static_cast<double>(t.dim(1)) * t.dim(2) * t.dim(3);
      const double bound = std::sqrt(6.0 / fan_in);
      for (T& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
    }
  }

  NetworkConfig cfg_;
  ModelParamsT<T> params_;
};

using IdNet = IdNetT<float>;

/// Residual-motion estimator abstraction used by the update schemes:
/// (voxel grid, RNN state) -> (residual flow, new state, optional future flow).
class ResidualFlowExtractor {
 public:
  virtual ~ResidualFlowExtractor() = default;
  virtual ExtractOutT<float> extract(const VoxelGrid& grid, const Tensor& state) = 0;
  virtual Tensor warm_start(const Tensor& flow) = 0;
  virtual Tensor initial_state(int height, int width) const = 0;
  virtual bool provides_future() const { return false; }
};

/// The learned extractor.
class NetExtractor final : public ResidualFlowExtractor {
 public:
  explicit NetExtractor(IdNet& net) : net_(&net) {}
  ExtractOutT<float> extract(const VoxelGrid& grid, const Tensor& state) override {
    return net_->rnn_extract(grid, state);
  }
  Tensor warm_start(const Tensor& flow) override { return net_->wsm_forward(flow); }
  Tensor initial_state(int height, int width) const override {
    return net_->initial_state(height, width);
  }
  bool provides_future() const override { return net_->config().future_head; }

 private:
  IdNet* net_;
};

}  // namespace idflow
