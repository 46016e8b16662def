#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "sdfield/encoder.hpp"
#include "sdfield/error.hpp"

using namespace sdfield;

namespace {

Image random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(w, h);
  for (float& p : img.pixels) p = u(rng);
  return img;
}

// Straightforward re-implementation of one stride-2 layer on nested vectors.
std::vector<std::vector<std::vector<double>>> reference_layer(const std::vector<std::vector<std::vector<double>>>& in,
                                                              const ConvLayer& layer) {
  const int c_in = static_cast<int>(in.size()), h = static_cast<int>(in[0].size()),
            w = static_cast<int>(in[0][0].size());
  const int oh = h / 2, ow = w / 2;
  std::vector<std::vector<std::vector<double>>> out(layer.out_channels,
                                                    std::vector<std::vector<double>>(oh, std::vector<double>(ow)));
  for (int o = 0; o < layer.out_channels; ++o)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = layer.bias[o];
        for (int c = 0; c < c_in; ++c)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = std::clamp(2 * y + ky - 1, 0, h - 1), sx = std::clamp(2 * x + kx - 1, 0, w - 1);
              acc += layer.weight(o, c, ky, kx) * in[c][sy][sx];
            }
        out[o][y][x] = acc > 0 ? acc : 0;
      }
  return out;
}

}  // namespace

TEST(Encoder, LayerShapesHalve) {
  const EncoderParams p = make_encoder(30, 20, 1, {4, 5, 6}, 1);
  std::mt19937_64 rng(1);
  const FeatureMapStack s = encode_image(random_image(rng, 30, 20), p);
  ASSERT_EQ(s.layers.size(), 3u);
  EXPECT_EQ(s.layers[0].width, 15);
  EXPECT_EQ(s.layers[0].height, 10);
  EXPECT_EQ(s.layers[1].width, 7);
  EXPECT_EQ(s.layers[2].width, 3);
  EXPECT_EQ(s.layers[2].height, 2);
  EXPECT_EQ(s.global.size(), 6);
  EXPECT_EQ(s.local_dim(), 15);
}

TEST(Encoder, ZeroImageZeroBiasGivesZeros) {
  const EncoderParams p = make_encoder(16, 16, 1, {4, 4, 4}, 2);
  const FeatureMapStack s = encode_image(Image(16, 16), p);
  for (const auto& l : s.layers)
    for (double v : l.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.global.norm(), 0.0);
}

TEST(Encoder, ConstantImageUnitSumKernelsGiveConstantMaps) {
  EncoderParams p = make_encoder(16, 16, 1, {3, 2, 2}, 3);
  for (auto& layer : p.layers) {
    std::fill(layer.kernel.begin(), layer.kernel.end(), 1.0 / (9.0 * layer.in_channels));
  }
  const FeatureMapStack s = encode_image(Image(16, 16, 1, 0.7f), p);
  for (const auto& l : s.layers)
    for (double v : l.values) EXPECT_NEAR(v, static_cast<double>(0.7f), 1e-12);
}

TEST(Encoder, MatchesReferenceConvolutionAndMean) {
  std::mt19937_64 rng(4);
  const EncoderParams p = make_encoder(24, 18, 1, {3, 4, 5}, 4);
  EncoderParams biased = p;
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& l : biased.layers)
    for (double& b : l.bias) b = u(rng);
  const Image img = random_image(rng, 24, 18);
  const FeatureMapStack s = encode_image(img, biased);
  std::vector<std::vector<std::vector<double>>> act(1, std::vector<std::vector<double>>(18, std::vector<double>(24)));
  for (int y = 0; y < 18; ++y)
    for (int x = 0; x < 24; ++x) act[0][y][x] = img.at(x, y);
  for (std::size_t l = 0; l < biased.layers.size(); ++l) {
    act = reference_layer(act, biased.layers[l]);
    const FeatureMap& m = s.layers[l];
    for (int c = 0; c < m.channels; ++c)
      for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) EXPECT_NEAR(m.at(x, y, c), act[c][y][x], 1e-12);
  }
  for (std::size_t c = 0; c < act.size(); ++c) {
    long double sum = 0;
    std::size_t n = 0;
    for (const auto& row : act[c])
      for (double v : row) sum += v, ++n;
    EXPECT_NEAR(s.global[static_cast<Eigen::Index>(c)], static_cast<double>(sum / n), 1e-6);
  }
}

TEST(Encoder, ShapeMismatch) {
  const EncoderParams p = make_encoder(16, 16, 1, {2}, 5);
  try {
    encode_image(Image(8, 16), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeError);
  }
}

TEST(Encoder, ParametersAreFloatRepresentable) {
  const EncoderParams p = make_encoder(16, 16, 1, {4, 8}, 6);
  for (const auto& l : p.layers)
    for (double w : l.kernel) EXPECT_EQ(w, static_cast<double>(static_cast<float>(w)));
}

TEST(Encoder, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  const int w = 16, h = 12;
  EncoderParams p = make_encoder(w, h, 1, {3, 4, 3}, 7);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (auto& l : p.layers)
    for (double& b : l.bias) b = u(rng) + 0.05;
  const Image img = random_image(rng, w, h);
  FeatureMapStack s = encode_image(img, p);
  // loss = sum_l <G_l, layer_l> + <g, global> with fixed random G, g.
  std::vector<std::vector<double>> G;
  for (const auto& l : s.layers) {
    G.emplace_back(l.values.size());
    for (double& v : G.back()) v = u(rng);
  }
  Eigen::VectorXd g(s.global.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = u(rng);
  const auto loss = [&](const EncoderParams& q) {
    const FeatureMapStack t = encode_image(img, q);
    double L = g.dot(t.global);
    for (std::size_t l = 0; l < t.layers.size(); ++l)
      for (std::size_t i = 0; i < G[l].size(); ++i) L += G[l][i] * t.layers[l].values[i];
    return L;
  };
  EncoderParams grads = p;
  for (auto& l : grads.layers) {
    std::fill(l.kernel.begin(), l.kernel.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  encode_image_backward(img, p, s, G, g, grads);
  const double hstep = 1e-6;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (std::size_t i = 0; i < p.layers[l].kernel.size(); i += 3) {
      EncoderParams a = p, b = p;
      a.layers[l].kernel[i] += hstep;
      b.layers[l].kernel[i] -= hstep;
      EXPECT_LT(oracle::relative_error(grads.layers[l].kernel[i], (loss(a) - loss(b)) / (2 * hstep)), 1e-4);
    }
    for (std::size_t i = 0; i < p.layers[l].bias.size(); ++i) {
      EncoderParams a = p, b = p;
      a.layers[l].bias[i] += hstep;
      b.layers[l].bias[i] -= hstep;
      EXPECT_LT(oracle::relative_error(grads.layers[l].bias[i], (loss(a) - loss(b)) / (2 * hstep)), 1e-4);
    }
  }
}

TEST(Bilinear, TexelCentersAndAverage) {
  FeatureMap m{2, 2, 1, {1, 2, 3, 4}};
  EXPECT_EQ(bilinear_sample(m, Vec2(0.5, 0.5), 2, 2)[0], 2.5);
  EXPECT_EQ(bilinear_sample(m, Vec2(1, 0), 2, 2)[0], 2.0);
  EXPECT_EQ(bilinear_sample(m, Vec2(-50, 90), 2, 2)[0], 3.0);
  EXPECT_EQ(bilinear_sample(m, Vec2(50, 90), 2, 2)[0], 4.0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  FeatureMap r{7, 5, 3, std::vector<double>(7 * 5 * 3)};
  for (double& v : r.values) v = u(rng);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) {
      // The map is half the image size; texel (x, y) sits at image (2x, 2y).
      const FeatureVector f = bilinear_sample(r, Vec2(2 * x, 2 * y), 14, 10);
      for (int c = 0; c < 3; ++c) EXPECT_EQ(f[c], r.at(x, y, c));
    }
}

TEST(Bilinear, LipschitzInQ) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1), pos(0.0, 5.0);
  FeatureMap m{6, 6, 1, std::vector<double>(36)};
  for (double& v : m.values) v = u(rng);
  double L = 0.0;
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      if (x + 1 < 6) L = std::max(L, std::abs(m.at(x + 1, y, 0) - m.at(x, y, 0)));
      if (y + 1 < 6) L = std::max(L, std::abs(m.at(x, y + 1, 0) - m.at(x, y, 0)));
    }
  for (int i = 0; i < 500; ++i) {
    const Vec2 q(pos(rng), pos(rng));
    const Vec2 dq(1e-3 * u(rng), 1e-3 * u(rng));
    const double diff = std::abs(bilinear_sample(m, q, 6, 6)[0] - bilinear_sample(m, q + dq, 6, 6)[0]);
    // Bilinear interpolation is L-Lipschitz per axis, so L * (|dx| + |dy|) bounds the change.
    EXPECT_LE(diff, L * dq.lpNorm<1>() + 1e-15);
  }
}

TEST(LocalFeatures, OrderingAndConstantMaps) {
  FeatureMapStack s;
  s.image_width = 8;
  s.image_height = 8;
  s.layers.push_back({4, 4, 2, std::vector<double>(32)});
  s.layers.push_back({2, 2, 3, std::vector<double>(12)});
  for (int i = 0; i < 16; ++i) s.layers[0].values[2 * i] = 1, s.layers[0].values[2 * i + 1] = 2;
  for (int i = 0; i < 4; ++i) s.layers[1].values[3 * i] = 3, s.layers[1].values[3 * i + 1] = 4, s.layers[1].values[3 * i + 2] = 5;
  for (const Vec2& q : {Vec2(0, 0), Vec2(3.3, 6.1), Vec2(-4, 20)}) {
    const FeatureVector f = local_features(s, q);
    ASSERT_EQ(f.size(), 5);
    for (int k = 0; k < 5; ++k) EXPECT_EQ(f[k], k + 1);
  }
  FeatureMapStack one = s;
  one.layers.resize(1);
  one.layers[0].values[5] = 9;
  EXPECT_EQ(local_features(one, Vec2(2.2, 1.7)), bilinear_sample(one.layers[0], Vec2(2.2, 1.7), 8, 8));
}

TEST(Pooling, MaxOverViews) {
  std::mt19937_64 rng(10);
  const EncoderParams p = make_encoder(16, 16, 1, {3, 4}, 11);
  std::vector<FeatureMapStack> stacks;
  std::vector<Vec2> qs;
  for (int v = 0; v < 3; ++v) {
    stacks.push_back(encode_image(random_image(rng, 16, 16), p));
    qs.emplace_back(3.0 * v + 1.5, 10.0 - 2.0 * v);
  }
  const PooledFeatures pooled = pool_multiview(stacks, qs);
  for (Eigen::Index i = 0; i < pooled.global.size(); ++i)
    EXPECT_EQ(pooled.global[i], std::max({stacks[0].global[i], stacks[1].global[i], stacks[2].global[i]}));
  for (Eigen::Index i = 0; i < pooled.local.size(); ++i) {
    double m = -1e300;
    for (int v = 0; v < 3; ++v) m = std::max(m, local_features(stacks[v], qs[v])[i]);
    EXPECT_EQ(pooled.local[i], m);
  }
  std::vector<FeatureMapStack> rev(stacks.rbegin(), stacks.rend());
  std::vector<Vec2> rq(qs.rbegin(), qs.rend());
  const PooledFeatures swapped = pool_multiview(rev, rq);
  EXPECT_EQ(swapped.global, pooled.global);
  EXPECT_EQ(swapped.local, pooled.local);
  const PooledFeatures single = pool_multiview(std::span(stacks).first(1), std::span(qs).first(1));
  EXPECT_EQ(single.global, stacks[0].global);
  EXPECT_EQ(single.local, local_features(stacks[0], qs[0]));
  EXPECT_THROW(pool_multiview(stacks, std::span(qs).first(2)), Error);
}

TEST(Interpolate, EndpointsAndMidpoint) {
  const FeatureVector a = Eigen::Vector2d(0, 2), b = Eigen::Vector2d(2, 0);
  EXPECT_EQ(interpolate_features(a, b, 0.0), a);
  EXPECT_EQ(interpolate_features(a, b, 1.0), b);
  EXPECT_EQ(interpolate_features(a, b, 0.5), FeatureVector(Eigen::Vector2d(1, 1)));
  EXPECT_THROW(interpolate_features(a, FeatureVector::Zero(3), 0.5), Error);
}
