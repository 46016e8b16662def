#include <gtest/gtest.h>

#include <sstream>

#include "model_fixture.hpp"
#include "sdfield/error.hpp"
#include "sdfield/model_io.hpp"
#include "sdfield/train.hpp"

using namespace sdfield;

namespace {

TrainConfig short_config(int iterations) {
  TrainConfig cfg;
  cfg.iterations = iterations;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-3;
  cfg.seed = 5;
  return cfg;
}

bool same_params(SdfModel a, SdfModel b) {
  auto x = parameter_blocks(a), y = parameter_blocks(b);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::equal(x[i].values.begin(), x[i].values.end(), y[i].values.begin(), y[i].values.end())) return false;
  return true;
}

}  // namespace

TEST(Train, ZeroIterationsLeavesModelUnchanged) {
  const SdfModel m = fixture::small_model(Variant::two_stream, 1);
  const TrainResult r = train(m, fixture::small_set(2, 20), short_config(0));
  EXPECT_TRUE(r.loss_log.empty());
  EXPECT_TRUE(same_params(m, r.model));
}

TEST(Train, SameSeedSameLossLog) {
  const SdfModel m = fixture::small_model(Variant::two_stream, 3);
  const TrainingSet set = fixture::small_set(4, 40);
  const TrainResult a = train(m, set, short_config(30));
  const TrainResult b = train(m, set, short_config(30));
  EXPECT_EQ(a.loss_log, b.loss_log);
  EXPECT_TRUE(same_params(a.model, b.model));
  TrainConfig other = short_config(30);
  other.seed = 6;
  EXPECT_NE(train(m, set, other).loss_log, a.loss_log);
}

TEST(Train, TrainedModelRoundTripsThroughModelFile) {
  const TrainResult r = train(fixture::small_model(Variant::two_stream, 7), fixture::small_set(8, 40), short_config(20));
  std::stringstream ss;
  write_model(ss, r.model);
  EXPECT_TRUE(same_params(r.model, read_model(ss)));
}

TEST(Train, LossDecreasesOnFixedBatch) {
  const SdfModel m = fixture::small_model(Variant::two_stream, 7);
  const TrainingSet set = fixture::small_set(8, 8);
  TrainConfig cfg = short_config(200);
  const TrainResult r = train(m, set, cfg);
  EXPECT_LT(r.loss_log.back(), 0.5 * r.loss_log.front());
}

TEST(Train, GlobalOnlyLeavesLocalDecoderAndFrozenEncoderUntouched) {
  const SdfModel m = restrict_to_global(fixture::small_model(Variant::two_stream, 9));
  TrainConfig cfg = short_config(20);
  cfg.train_encoder = false;
  const TrainResult r = train(m, fixture::small_set(10, 30), cfg);
  SdfModel before = m, after = r.model;
  auto a = parameter_blocks(before), b = parameter_blocks(after);
  bool lift_changed = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool equal = std::equal(a[i].values.begin(), a[i].values.end(), b[i].values.begin(), b[i].values.end());
    if (a[i].group == ParamGroup::local_decoder || a[i].group == ParamGroup::encoder) EXPECT_TRUE(equal);
    if (a[i].group == ParamGroup::point_lift && !equal) lift_changed = true;
  }
  EXPECT_TRUE(lift_changed);
}

TEST(Train, CosineScheduleIsDeterministicAndDiffersFromConstant) {
  const SdfModel m = fixture::small_model(Variant::two_stream, 11);
  const TrainingSet set = fixture::small_set(12, 30);
  TrainConfig cfg = short_config(25);
  cfg.cosine_decay = true;
  const TrainResult a = train(m, set, cfg), b = train(m, set, cfg);
  EXPECT_EQ(a.loss_log, b.loss_log);
  EXPECT_NE(a.loss_log, train(m, set, short_config(25)).loss_log);
}

TEST(Train, Errors) {
  const SdfModel m = fixture::small_model(Variant::two_stream, 13);
  try {
    train(m, TrainingSet{}, short_config(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDataset);
  }
  TrainConfig bad = short_config(1);
  bad.batch_size = 0;
  EXPECT_THROW(train(m, fixture::small_set(14, 4), bad), Error);
}

TEST(Train, EvaluateReportsSignAccuracyAndError) {
  const SdfModel m = fixture::small_model(Variant::two_stream, 15);
  const TrainingSet set = fixture::small_set(16, 25);
  const EvalSummary e = evaluate(m, set, LossParams{});
  ASSERT_EQ(e.predictions.size(), 25u);
  double mae = 0.0;
  for (std::size_t i = 0; i < 25; ++i) mae += std::abs(e.predictions[i] - set.examples[i].sample.s) / 25;
  EXPECT_NEAR(e.mean_abs_error, mae, 1e-12);
  EXPECT_GE(e.sign_accuracy, 0.0);
  EXPECT_LE(e.sign_accuracy, 1.0);
}

TEST(Train, LossLogFormat) {
  std::stringstream ss;
  write_loss_log(ss, {1.5, 0.25});
  EXPECT_EQ(ss.str(), "0 1.5\n1 0.25\n");
}

TEST(Projection, BehindCameraFallsBackToPrincipalPoint) {
  std::mt19937_64 rng(17);
  const TrainingView v = fixture::small_view(rng);
  const Projection behind = project_for_features(v, v.pose.center() - (Vec3::Zero() - v.pose.center()));
  EXPECT_TRUE(behind.fallback);
  EXPECT_EQ(behind.q, Vec2(v.intrinsics.cx, v.intrinsics.cy));
  EXPECT_FALSE(project_for_features(v, Vec3::Zero()).fallback);
}
