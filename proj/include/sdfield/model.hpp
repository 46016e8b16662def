#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdfield/encoder.hpp"
#include "sdfield/mlp.hpp"

namespace sdfield {

enum class Variant { two_stream, one_stream, binary };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct ModelDims {
  int image_width = 128;
  int image_height = 128;
  int image_channels = 1;
  std::vector<int> encoder_channels = kDefaultEncoderChannels;
  // Hidden and output widths of the point-lifting MLP (input is 3).
  std::vector<int> point_lift = {64, 256, 512};
  // Hidden widths of each decoder (output is 1).
  std::vector<int> decoder_hidden = {512, 256};
};

// Image encoder, shared point-lifting MLP and the decoder streams.
//   two_stream: s = D_g([f(p); g]) + D_l([f(p); l])
//   one_stream: s = D([f(p); g; l]), held in global_decoder
//   binary:     P(inside) = sigmoid(D_g + D_l)
// With local_stream off, the local decoder is excluded from the forward pass
// and from training, which realizes the global-only restriction.
struct SdfModel {
  Variant variant = Variant::two_stream;
  bool local_stream = true;
  EncoderParams encoder;
  MlpParams point_lift;
  MlpParams global_decoder;
  MlpParams local_decoder;

  int point_dim() const { return point_lift.out_dim(); }
  int global_dim() const;
  int local_dim() const;
  bool uses_local_decoder() const { return variant != Variant::one_stream && local_stream; }
  // Throws ShapeError on any inconsistency between the parts.
  void validate() const;
};

SdfModel make_model(const ModelDims& dims, Variant variant, std::uint64_t seed);
SdfModel zeros_like(const SdfModel& model);
// Zeroes the local decoder and disables its stream.
SdfModel restrict_to_global(SdfModel model);

enum class ParamGroup { encoder, point_lift, global_decoder, local_decoder };
const char* to_string(ParamGroup g);

struct ParamBlock {
  ParamGroup group;
  std::span<double> values;
};

// Every parameter array in declaration order: encoder (kernel, bias per
// layer), point_lift, global_decoder, local_decoder (weight row-major, bias
// per layer). Identically shaped models yield aligned blocks.
std::vector<ParamBlock> parameter_blocks(SdfModel& model);
std::size_t parameter_count(const SdfModel& model);

FeatureVector lift_point(const Vec3& p, const MlpParams& params);

double predict_sdf(const SdfModel& model, const FeatureVector& global, const FeatureVector& local,
                   const Vec3& p);
double predict_sdf_one_stream(const SdfModel& model, const FeatureVector& global,
                              const FeatureVector& local, const Vec3& p);
double predict_inside_prob(const SdfModel& model, const FeatureVector& global,
                           const FeatureVector& local, const Vec3& p);

// Columns are samples: points 3xB, global gdim x B, local ldim x B.
struct BatchInputs {
  Eigen::MatrixXd points;
  Eigen::MatrixXd global;
  Eigen::MatrixXd local;
};

// Everything the backward pass needs from a batched forward.
struct ForwardTrace {
  MlpTrace lift;
  MlpTrace global_stream;
  MlpTrace local_stream;
  // Regression output, or the logit for the binary variant.
  Eigen::RowVectorXd output;
};

ForwardTrace forward_batch(const SdfModel& model, const BatchInputs& in);

struct InputGradients {
  Eigen::MatrixXd global;  // gdim x B
  Eigen::MatrixXd local;   // ldim x B
};

// d(loss)/d(output) per column -> parameter gradients (accumulated into
// grads) and gradients of the image-feature inputs.
InputGradients backward_batch(const SdfModel& model, const ForwardTrace& trace,
                              const Eigen::RowVectorXd& grad_output, SdfModel& grads);

// Signed field used for extraction: the SDF for regression variants, the
// negated logit (positive outside) for the binary variant.
Eigen::RowVectorXd field_values(const SdfModel& model, const BatchInputs& in);

}  // namespace sdfield
