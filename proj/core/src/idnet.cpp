#include "idflow/idnet.hpp"

#include "idflow/error.hpp"

namespace idflow {

void NetworkConfig::validate() const {
  if (bins < 2) throw Error(ErrorKind::Domain, "config: bins must be >= 2");
  if (channels < 8) throw Error(ErrorKind::Domain, "config: channels must be >= 8");
  if (channels % 2 != 0) throw Error(ErrorKind::Domain, "config: channels must be even");
  if (downsample != 8) throw Error(ErrorKind::Domain, "config: downsample factor is fixed at 8");
}

void NetworkConfig::validate_resolution(int height, int width) const {
  if (height <= 0 || width <= 0 || height % downsample != 0 || width % downsample != 0)
    throw Error(ErrorKind::Shape, "resolution must be positive and divisible by 8");
}

std::vector<ConvLayerSpec> encoder_layers(const std::string& prefix, int in_ch, int channels) {
  const int half = channels / 2;
  return {
      {prefix + ".conv1", in_ch, half, 3, 2, true, false},
      {prefix + ".conv2", half, half, 3, 1, true, true},
      {prefix + ".conv3", half, channels, 3, 2, true, false},
      {prefix + ".conv4", channels, channels, 3, 1, true, true},
      {prefix + ".conv5", channels, channels, 3, 2, true, false},
  };
}

std::vector<ConvLayerSpec> head_layers(const std::string& prefix, int channels) {
  return {
      {prefix + ".conv1", channels, channels / 2, 3, 1, true, false},
      {prefix + ".conv2", channels / 2, 2, 3, 1, false, false},
  };
}

std::vector<ConvLayerSpec> gru_layers(const std::string& prefix, int channels) {
  return {
      {prefix + ".z", 2 * channels, channels, 3, 1, false, false},
      {prefix + ".r", 2 * channels, channels, 3, 1, false, false},
      {prefix + ".h", 2 * channels, channels, 3, 1, false, false},
  };
}

}  // namespace idflow
