#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sdfield/camera.hpp"
#include "sdfield/image.hpp"
#include "sdfield/loss.hpp"
#include "sdfield/model.hpp"
#include "sdfield/sampling.hpp"

namespace sdfield {

// An input image with the pose used to project query points into it
// (ground truth during training, estimated for the camera-fitted mode).
struct TrainingView {
  Image image;
  CameraPose pose;
  Intrinsics intrinsics;
};

struct TrainingExample {
  PointSample sample;
  std::uint32_t view = 0;
};

struct TrainingSet {
  std::vector<TrainingView> views;
  std::vector<TrainingExample> examples;

  // Throws EmptyDataset / ShapeError.
  void validate() const;
};

// Projection of p into the view; points at or behind the camera fall back to
// the principal point and set `fallback`.
struct Projection {
  Vec2 q = Vec2::Zero();
  bool fallback = false;
};
Projection project_for_features(const TrainingView& view, const Vec3& p);

struct BatchGradients {
  double loss = 0.0;
  SdfModel grads;
};

// Summed loss of the batch (weighted L1 for regression variants, cross
// entropy for binary) and its gradient with respect to every parameter,
// including the encoder through both global and local features.
BatchGradients backward(const SdfModel& model, const TrainingSet& set,
                        std::span<const std::size_t> batch, const LossParams& lp);
double batch_loss(const SdfModel& model, const TrainingSet& set, std::span<const std::size_t> batch,
                  const LossParams& lp);

struct EvalSummary {
  double mean_loss = 0.0;
  double mean_abs_error = 0.0;  // |pred - gt| for regression variants
  // Fraction of examples whose predicted side (sign / thresholded
  // probability) matches the ground-truth sign.
  double sign_accuracy = 0.0;
  std::vector<double> predictions;
};
EvalSummary evaluate(const SdfModel& model, const TrainingSet& set, const LossParams& lp);

struct TrainConfig {
  double learning_rate = 1e-4;
  // Cosine decay from learning_rate to final_learning_rate over the run;
  // constant rate when off.
  bool cosine_decay = false;
  double final_learning_rate = 1e-6;
  int batch_size = 16;
  int iterations = 1000;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool train_encoder = true;
  LossParams loss;

  void validate() const;
};

struct TrainResult {
  SdfModel model;
  std::vector<double> loss_log;  // batch loss per iteration
};

// Called after each parameter update with that iteration's batch loss.
using TrainProgress = std::function<void(int iteration, double loss, const SdfModel& current)>;

// Adam on the summed batch loss. Batches walk a per-epoch shuffle drawn from
// cfg.seed, so runs are bit-reproducible.
TrainResult train(const SdfModel& model, const TrainingSet& set, const TrainConfig& cfg,
                  const TrainProgress& progress = {});

// `iter loss` per line.
void write_loss_log(std::ostream& out, const std::vector<double>& log);
void save_loss_log(const std::string& path, const std::vector<double>& log);

}  // namespace sdfield
