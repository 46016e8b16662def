#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sdfield/image.hpp"
#include "sdfield/mesh.hpp"

namespace sdfield {

using FeatureVector = Eigen::VectorXd;

// 3x3, stride-2 convolution with edge-replicated borders followed by ReLU.
// kernel is laid out [out][in][ky][kx].
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> kernel;
  std::vector<double> bias;

  double& weight(int o, int c, int ky, int kx) { return kernel[((o * in_channels + c) * 3 + ky) * 3 + kx]; }
  double weight(int o, int c, int ky, int kx) const {
    return kernel[((o * in_channels + c) * 3 + ky) * 3 + kx];
  }
};

struct EncoderParams {
  int image_width = 128;
  int image_height = 128;
  int image_channels = 1;
  std::vector<ConvLayer> layers;

  // Throws ShapeError if channel counts do not chain.
  void validate() const;
};

inline const std::vector<int> kDefaultEncoderChannels = {8, 16, 32};

// Glorot-uniform kernels, zero biases; values are f32-representable.
EncoderParams make_encoder(int image_width, int image_height, int image_channels,
                           const std::vector<int>& channels, std::uint64_t seed);

// Row-major, channel-interleaved map: value(x, y, c) = values[(y*w + x)*c_total + c].
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;

  double& at(int x, int y, int c) { return values[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  double at(int x, int y, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

struct FeatureMapStack {
  int image_width = 0;
  int image_height = 0;
  std::vector<FeatureMap> layers;
  FeatureVector global;

  int local_dim() const;
};

// Forward pass. The global vector is the per-channel spatial mean of the last
// layer. Throws ShapeError when the image does not match the encoder input.
FeatureMapStack encode_image(const Image& img, const EncoderParams& params);

// Accumulates parameter gradients given d(loss)/d(layer values) for every
// stack layer and d(loss)/d(global). map_grads[l] has the layout of layers[l].
void encode_image_backward(const Image& img, const EncoderParams& params, const FeatureMapStack& stack,
                           std::vector<std::vector<double>> map_grads, const FeatureVector& global_grad,
                           EncoderParams& grads);

// Four texels and weights of a bilinear lookup, in a map's own layout.
struct BilinearTaps {
  std::array<std::size_t, 4> texel{};  // texel offsets (y*w + x)
  std::array<double, 4> weight{};
};

// q is in original-image pixel coordinates with (0,0) at the top-left texel
// center; it is scaled by map/image size and clamped to [0, dim - 1].
BilinearTaps bilinear_taps(int map_width, int map_height, int image_width, int image_height,
                           const Vec2& q);

FeatureVector bilinear_sample(const FeatureMap& map, const Vec2& q, int image_width, int image_height);
FeatureVector local_features(const FeatureMapStack& stack, const Vec2& q);

struct PooledFeatures {
  FeatureVector global;
  FeatureVector local;
};

// Elementwise max over views of global vectors and of local features at the
// per-view projections.
PooledFeatures pool_multiview(std::span<const FeatureMapStack> stacks, std::span<const Vec2> qs);

FeatureVector interpolate_features(const FeatureVector& fa, const FeatureVector& fb, double alpha);

}  // namespace sdfield
