#include "sdfield/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sdfield/error.hpp"

namespace sdfield {

namespace {

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

// One conv layer forward; `in` is row-major interleaved with in_channels.
FeatureMap conv_forward(const double* in, int w, int h, const ConvLayer& layer) {
  FeatureMap out;
  out.width = w / 2;
  out.height = h / 2;
  out.channels = layer.out_channels;
  out.values.assign(static_cast<std::size_t>(out.width) * out.height * out.channels, 0.0);
  const int cin = layer.in_channels;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double* dst = &out.values[(static_cast<std::size_t>(y) * out.width + x) * out.channels];
      for (int o = 0; o < layer.out_channels; ++o) dst[o] = layer.bias[o];
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = clampi(2 * y + ky - 1, 0, h - 1);
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = clampi(2 * x + kx - 1, 0, w - 1);
          const double* src = in + (static_cast<std::size_t>(sy) * w + sx) * cin;
          for (int o = 0; o < layer.out_channels; ++o) {
            double acc = 0.0;
            for (int c = 0; c < cin; ++c) acc += layer.weight(o, c, ky, kx) * src[c];
            dst[o] += acc;
          }
        }
      }
      for (int o = 0; o < layer.out_channels; ++o) dst[o] = std::max(dst[o], 0.0);
    }
  }
  return out;
}

}  // namespace

void EncoderParams::validate() const {
  if (image_width < 1 || image_height < 1 || image_channels < 1 || layers.empty()) {
    throw Error(ErrorKind::ShapeError, "encoder has no layers or a bad input shape");
  }
  int c = image_channels;
  int w = image_width;
  int h = image_height;
  for (const auto& layer : layers) {
    w /= 2;
    h /= 2;
    if (layer.in_channels != c || layer.out_channels < 1 ||
        layer.kernel.size() != static_cast<std::size_t>(layer.out_channels) * layer.in_channels * 9 ||
        layer.bias.size() != static_cast<std::size_t>(layer.out_channels) || w < 1 || h < 1) {
      throw Error(ErrorKind::ShapeError, "encoder layer shapes do not chain");
    }
    c = layer.out_channels;
  }
}

EncoderParams make_encoder(int image_width, int image_height, int image_channels,
                           const std::vector<int>& channels, std::uint64_t seed) {
  EncoderParams p;
  p.image_width = image_width;
  p.image_height = image_height;
  p.image_channels = image_channels;
  std::mt19937_64 rng(seed);
  int cin = image_channels;
  for (int cout : channels) {
    ConvLayer layer;
    layer.in_channels = cin;
    layer.out_channels = cout;
    const double limit = std::sqrt(6.0 / (9.0 * cin + 9.0 * cout));
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.kernel.resize(static_cast<std::size_t>(cout) * cin * 9);
    for (auto& k : layer.kernel) k = static_cast<float>(dist(rng));
    layer.bias.assign(static_cast<std::size_t>(cout), 0.0);
    p.layers.push_back(std::move(layer));
    cin = cout;
  }
  p.validate();
  return p;
}

int FeatureMapStack::local_dim() const {
  int n = 0;
  for (const auto& l : layers) n += l.channels;
  return n;
}

FeatureMapStack encode_image(const Image& img, const EncoderParams& params) {
  params.validate();
  img.validate();
  if (img.width != params.image_width || img.height != params.image_height ||
      img.channels != params.image_channels) {
    throw Error(ErrorKind::ShapeError,
                "image " + std::to_string(img.width) + "x" + std::to_string(img.height) + "x" +
                    std::to_string(img.channels) + " does not match encoder input " +
                    std::to_string(params.image_width) + "x" + std::to_string(params.image_height) +
                    "x" + std::to_string(params.image_channels));
  }
  FeatureMapStack stack;
  stack.image_width = img.width;
  stack.image_height = img.height;
  std::vector<double> input(img.pixels.begin(), img.pixels.end());
  int w = img.width;
  int h = img.height;
  const double* src = input.data();
  for (const auto& layer : params.layers) {
    stack.layers.push_back(conv_forward(src, w, h, layer));
    const auto& out = stack.layers.back();
    w = out.width;
    h = out.height;
    src = out.values.data();
  }
  const auto& last = stack.layers.back();
  stack.global = FeatureVector::Zero(last.channels);
  for (int y = 0; y < last.height; ++y) {
    for (int x = 0; x < last.width; ++x) {
      for (int c = 0; c < last.channels; ++c) stack.global[c] += last.at(x, y, c);
    }
  }
  stack.global /= static_cast<double>(last.width) * last.height;
  return stack;
}

void encode_image_backward(const Image& img, const EncoderParams& params, const FeatureMapStack& stack,
                           std::vector<std::vector<double>> map_grads, const FeatureVector& global_grad,
                           EncoderParams& grads) {
  const std::size_t n_layers = params.layers.size();
  if (map_grads.size() != n_layers || stack.layers.size() != n_layers ||
      grads.layers.size() != n_layers) {
    throw Error(ErrorKind::ShapeError, "encoder gradient buffers do not match the stack");
  }
  {
    auto& top = map_grads.back();
    const auto& last = stack.layers.back();
    const double inv = 1.0 / (static_cast<double>(last.width) * last.height);
    for (std::size_t px = 0; px < static_cast<std::size_t>(last.width) * last.height; ++px) {
      for (int c = 0; c < last.channels; ++c) top[px * last.channels + c] += global_grad[c] * inv;
    }
  }
  const std::vector<double> image_values(img.pixels.begin(), img.pixels.end());
  for (std::size_t li = n_layers; li-- > 0;) {
    const ConvLayer& layer = params.layers[li];
    ConvLayer& g = grads.layers[li];
    const FeatureMap& out = stack.layers[li];
    const double* in = li == 0 ? image_values.data() : stack.layers[li - 1].values.data();
    const int w = li == 0 ? img.width : stack.layers[li - 1].width;
    const int h = li == 0 ? img.height : stack.layers[li - 1].height;
    const int cin = layer.in_channels;
    std::vector<double>* in_grad = li == 0 ? nullptr : &map_grads[li - 1];
    auto& go = map_grads[li];
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const std::size_t base = (static_cast<std::size_t>(y) * out.width + x) * out.channels;
        for (int o = 0; o < layer.out_channels; ++o) {
          // ReLU gate: zero output means zero (sub)gradient.
          const double gz = out.values[base + o] > 0.0 ? go[base + o] : 0.0;
          if (gz == 0.0) continue;
          g.bias[o] += gz;
          for (int ky = 0; ky < 3; ++ky) {
            const int sy = clampi(2 * y + ky - 1, 0, h - 1);
            for (int kx = 0; kx < 3; ++kx) {
              const int sx = clampi(2 * x + kx - 1, 0, w - 1);
              const std::size_t src = (static_cast<std::size_t>(sy) * w + sx) * cin;
              for (int c = 0; c < cin; ++c) {
                g.weight(o, c, ky, kx) += gz * in[src + c];
                if (in_grad != nullptr) (*in_grad)[src + c] += gz * layer.weight(o, c, ky, kx);
              }
            }
          }
        }
      }
    }
  }
}

BilinearTaps bilinear_taps(int map_width, int map_height, int image_width, int image_height,
                           const Vec2& q) {
  auto axis = [](double coord, int map_dim, int image_dim, int& i0, double& f) {
    double u = coord * static_cast<double>(map_dim) / static_cast<double>(image_dim);
    if (!std::isfinite(u)) u = 0.0;
    u = std::clamp(u, 0.0, static_cast<double>(map_dim - 1));
    i0 = std::min(static_cast<int>(std::floor(u)), std::max(map_dim - 2, 0));
    f = map_dim > 1 ? u - i0 : 0.0;
  };
  int x0 = 0;
  int y0 = 0;
  double fx = 0.0;
  double fy = 0.0;
  axis(q.x(), map_width, image_width, x0, fx);
  axis(q.y(), map_height, image_height, y0, fy);
  const int x1 = std::min(x0 + 1, map_width - 1);
  const int y1 = std::min(y0 + 1, map_height - 1);
  BilinearTaps taps;
  auto off = [&](int x, int y) { return static_cast<std::size_t>(y) * map_width + x; };
  taps.texel = {off(x0, y0), off(x1, y0), off(x0, y1), off(x1, y1)};
  taps.weight = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  return taps;
}

FeatureVector bilinear_sample(const FeatureMap& map, const Vec2& q, int image_width, int image_height) {
  const auto taps = bilinear_taps(map.width, map.height, image_width, image_height, q);
  FeatureVector out = FeatureVector::Zero(map.channels);
  for (int k = 0; k < 4; ++k) {
    if (taps.weight[k] == 0.0) continue;
    const double* v = &map.values[taps.texel[k] * map.channels];
    for (int c = 0; c < map.channels; ++c) out[c] += taps.weight[k] * v[c];
  }
  return out;
}

FeatureVector local_features(const FeatureMapStack& stack, const Vec2& q) {
  if (stack.layers.empty()) throw Error(ErrorKind::ShapeError, "empty feature stack");
  FeatureVector out(stack.local_dim());
  int offset = 0;
  for (const auto& layer : stack.layers) {
    out.segment(offset, layer.channels) = bilinear_sample(layer, q, stack.image_width, stack.image_height);
    offset += layer.channels;
  }
  return out;
}

PooledFeatures pool_multiview(std::span<const FeatureMapStack> stacks, std::span<const Vec2> qs) {
  if (stacks.empty() || stacks.size() != qs.size()) {
    throw Error(ErrorKind::ShapeError, "need one projection per view and at least one view");
  }
  const auto& ref = stacks.front();
  for (const auto& s : stacks) {
    bool same = s.layers.size() == ref.layers.size() && s.global.size() == ref.global.size();
    for (std::size_t l = 0; same && l < s.layers.size(); ++l) {
      same = s.layers[l].channels == ref.layers[l].channels;
    }
    if (!same) throw Error(ErrorKind::ShapeError, "views have different feature layouts");
  }
  PooledFeatures out{ref.global, local_features(ref, qs.front())};
  for (std::size_t v = 1; v < stacks.size(); ++v) {
    out.global = out.global.cwiseMax(stacks[v].global);
    out.local = out.local.cwiseMax(local_features(stacks[v], qs[v]));
  }
  return out;
}

FeatureVector interpolate_features(const FeatureVector& fa, const FeatureVector& fb, double alpha) {
  if (fa.size() != fb.size()) throw Error(ErrorKind::ShapeError, "feature lengths differ");
  return (1.0 - alpha) * fa + alpha * fb;
}

}  // namespace sdfield
