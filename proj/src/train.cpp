#include "sdfield/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "sdfield/error.hpp"

namespace sdfield {

namespace {

struct ViewFeatures {
  FeatureMapStack stack;
  std::vector<std::size_t> columns;             // batch columns that use this view
  std::vector<std::vector<BilinearTaps>> taps;  // [column][layer]
};

struct PreparedBatch {
  BatchInputs inputs;
  std::map<std::uint32_t, ViewFeatures> views;
};

PreparedBatch prepare(const SdfModel& model, const TrainingSet& set, std::span<const std::size_t> batch) {
  PreparedBatch pb;
  const auto n = static_cast<Eigen::Index>(batch.size());
  pb.inputs.points.resize(3, n);
  pb.inputs.global.resize(model.global_dim(), n);
  pb.inputs.local.resize(model.local_dim(), n);
  for (Eigen::Index col = 0; col < n; ++col) {
    const auto idx = batch[static_cast<std::size_t>(col)];
    if (idx >= set.examples.size()) throw Error(ErrorKind::ShapeError, "batch index out of range");
    const auto& ex = set.examples[idx];
    auto it = pb.views.find(ex.view);
    if (it == pb.views.end()) {
      it = pb.views.emplace(ex.view, ViewFeatures{encode_image(set.views[ex.view].image, model.encoder), {}, {}})
               .first;
    }
    ViewFeatures& vf = it->second;
    const auto& view = set.views[ex.view];
    const Vec2 q = project_for_features(view, ex.sample.p).q;
    pb.inputs.points.col(col) = ex.sample.p;
    pb.inputs.global.col(col) = vf.stack.global;
    std::vector<BilinearTaps> taps;
    int offset = 0;
    for (const auto& layer : vf.stack.layers) {
      const auto t = bilinear_taps(layer.width, layer.height, vf.stack.image_width, vf.stack.image_height, q);
      for (int c = 0; c < layer.channels; ++c) {
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += t.weight[k] * layer.values[t.texel[k] * layer.channels + c];
        pb.inputs.local(offset + c, col) = v;
      }
      offset += layer.channels;
      taps.push_back(t);
    }
    vf.columns.push_back(static_cast<std::size_t>(col));
    vf.taps.push_back(std::move(taps));
  }
  return pb;
}

double example_loss(const SdfModel& model, double out, double gt, const LossParams& lp, double* grad) {
  if (model.variant == Variant::binary) {
    if (grad != nullptr) *grad = binary_loss_logit_grad(out, gt);
    return binary_loss_from_logit(out, gt);
  }
  if (grad != nullptr) *grad = sdf_loss_grad(out, gt, lp);
  return sdf_loss(out, gt, lp);
}

}  // namespace

void TrainingSet::validate() const {
  if (views.empty() || examples.empty()) throw Error(ErrorKind::EmptyDataset, "training set is empty");
  for (const auto& v : views) {
    v.image.validate();
    v.intrinsics.validate();
  }
  for (const auto& e : examples) {
    if (e.view >= views.size()) throw Error(ErrorKind::ShapeError, "example references a missing view");
  }
}

Projection project_for_features(const TrainingView& view, const Vec3& p) {
  const Vec3 pc = view.pose.apply(p);
  if (!(pc.z() > 1e-9)) return {Vec2(view.intrinsics.cx, view.intrinsics.cy), true};
  return {project_point(view.intrinsics, pc), false};
}

BatchGradients backward(const SdfModel& model, const TrainingSet& set, std::span<const std::size_t> batch,
                        const LossParams& lp) {
  BatchGradients out;
  out.grads = zeros_like(model);
  if (batch.empty()) return out;
  PreparedBatch pb = prepare(model, set, batch);
  const ForwardTrace trace = forward_batch(model, pb.inputs);

  Eigen::RowVectorXd grad_out(trace.output.size());
  for (Eigen::Index col = 0; col < trace.output.size(); ++col) {
    const double gt = set.examples[batch[static_cast<std::size_t>(col)]].sample.s;
    out.loss += example_loss(model, trace.output[col], gt, lp, &grad_out[col]);
  }
  const InputGradients ig = backward_batch(model, trace, grad_out, out.grads);

  for (auto& [view_index, vf] : pb.views) {
    std::vector<std::vector<double>> map_grads;
    for (const auto& layer : vf.stack.layers) map_grads.emplace_back(layer.values.size(), 0.0);
    FeatureVector global_grad = FeatureVector::Zero(model.global_dim());
    for (std::size_t k = 0; k < vf.columns.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(vf.columns[k]);
      global_grad += ig.global.col(col);
      int offset = 0;
      for (std::size_t l = 0; l < vf.stack.layers.size(); ++l) {
        const int ch = vf.stack.layers[l].channels;
        const auto& t = vf.taps[k][l];
        for (int tap = 0; tap < 4; ++tap) {
          if (t.weight[tap] == 0.0) continue;
          double* dst = &map_grads[l][t.texel[tap] * ch];
          for (int c = 0; c < ch; ++c) dst[c] += t.weight[tap] * ig.local(offset + c, col);
        }
        offset += ch;
      }
    }
    encode_image_backward(set.views[view_index].image, model.encoder, vf.stack, std::move(map_grads),
                          global_grad, out.grads.encoder);
  }
  return out;
}

double batch_loss(const SdfModel& model, const TrainingSet& set, std::span<const std::size_t> batch,
                  const LossParams& lp) {
  if (batch.empty()) return 0.0;
  const PreparedBatch pb = prepare(model, set, batch);
  const Eigen::RowVectorXd out = forward_batch(model, pb.inputs).output;
  double loss = 0.0;
  for (Eigen::Index col = 0; col < out.size(); ++col) {
    loss += example_loss(model, out[col], set.examples[batch[static_cast<std::size_t>(col)]].sample.s, lp, nullptr);
  }
  return loss;
}

EvalSummary evaluate(const SdfModel& model, const TrainingSet& set, const LossParams& lp) {
  set.validate();
  EvalSummary s;
  constexpr std::size_t kChunk = 1024;
  std::size_t agree = 0;
  for (std::size_t begin = 0; begin < set.examples.size(); begin += kChunk) {
    const std::size_t end = std::min(set.examples.size(), begin + kChunk);
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const PreparedBatch pb = prepare(model, set, idx);
    const Eigen::RowVectorXd out = forward_batch(model, pb.inputs).output;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double pred = out[static_cast<Eigen::Index>(k)];
      const double gt = set.examples[idx[k]].sample.s;
      s.mean_loss += example_loss(model, pred, gt, lp, nullptr);
      const bool predicted_inside = model.variant == Variant::binary ? pred > 0.0 : pred < 0.0;
      agree += predicted_inside == (gt < 0.0) ? 1 : 0;
      if (model.variant == Variant::binary) {
        s.predictions.push_back(sigmoid(pred));
      } else {
        s.mean_abs_error += std::abs(pred - gt);
        s.predictions.push_back(pred);
      }
    }
  }
  const auto n = static_cast<double>(set.examples.size());
  s.mean_loss /= n;
  s.mean_abs_error /= n;
  s.sign_accuracy = static_cast<double>(agree) / n;
  return s;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !(final_learning_rate >= 0.0) || batch_size < 1 || iterations < 0 || !(beta1 > 0.0 && beta1 < 1.0) ||
      !(beta2 > 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid training configuration");
  }
  loss.validate();
}

TrainResult train(const SdfModel& model, const TrainingSet& set, const TrainConfig& cfg,
                  const TrainProgress& progress) {
  set.validate();
  cfg.validate();
  model.validate();
  TrainResult result{model, {}};
  if (cfg.iterations == 0) return result;

  SdfModel& params = result.model;
  SdfModel m1 = zeros_like(model);
  SdfModel m2 = zeros_like(model);
  auto p_blocks = parameter_blocks(params);
  auto m_blocks = parameter_blocks(m1);
  auto v_blocks = parameter_blocks(m2);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(set.examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  std::vector<std::size_t> batch(static_cast<std::size_t>(cfg.batch_size));

  result.loss_log.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    for (auto& b : batch) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      b = order[cursor++];
    }
    BatchGradients bg = backward(params, set, batch, cfg.loss);
    if (!std::isfinite(bg.loss)) throw Error(ErrorKind::NumericFailure, "training loss diverged");
    result.loss_log.push_back(bg.loss);

    auto g_blocks = parameter_blocks(bg.grads);
    double lr = cfg.learning_rate;
    if (cfg.cosine_decay) {
      const double progress_frac = static_cast<double>(it) / cfg.iterations;
      lr = cfg.final_learning_rate +
           0.5 * (cfg.learning_rate - cfg.final_learning_rate) * (1.0 + std::cos(std::numbers::pi * progress_frac));
    }
    const double c1 = 1.0 - std::pow(cfg.beta1, it + 1);
    const double c2 = 1.0 - std::pow(cfg.beta2, it + 1);
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
      const ParamGroup group = p_blocks[b].group;
      if (group == ParamGroup::local_decoder && !params.uses_local_decoder()) continue;
      if (group == ParamGroup::encoder && !cfg.train_encoder) continue;
      auto p = p_blocks[b].values;
      auto g = g_blocks[b].values;
      auto mm = m_blocks[b].values;
      auto vv = v_blocks[b].values;
      for (std::size_t i = 0; i < p.size(); ++i) {
        mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * g[i];
        vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        // Parameters live at f32 precision, as stored in model files.
        p[i] = static_cast<float>(p[i] - lr * (mm[i] / c1) / (std::sqrt(vv[i] / c2) + cfg.epsilon));
      }
    }
    if (progress) progress(it, bg.loss, params);
  }
  return result;
}

void write_loss_log(std::ostream& out, const std::vector<double>& log) {
  out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < log.size(); ++i) out << i << ' ' << log[i] << '\n';
}

void save_loss_log(const std::string& path, const std::vector<double>& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_loss_log(out, log);
}

}  // namespace sdfield
