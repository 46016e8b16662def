#include "sdfield/model.hpp"

#include "sdfield/error.hpp"
#include "sdfield/loss.hpp"

namespace sdfield {

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> d{in};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(out);
  return d;
}

Eigen::MatrixXd stack_rows(std::initializer_list<const Eigen::MatrixXd*> parts) {
  Eigen::Index rows = 0;
  Eigen::Index cols = (*parts.begin())->cols();
  for (const auto* p : parts) rows += p->rows();
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index r = 0;
  for (const auto* p : parts) {
    out.middleRows(r, p->rows()) = *p;
    r += p->rows();
  }
  return out;
}

void check_batch(const SdfModel& model, const BatchInputs& in) {
  const auto b = in.points.cols();
  if (in.points.rows() != 3 || in.global.cols() != b || in.global.rows() != model.global_dim() ||
      in.local.cols() != b || in.local.rows() != model.local_dim()) {
    throw Error(ErrorKind::ShapeError, "batch inputs do not match the model feature dims");
  }
}

BatchInputs single(const SdfModel& model, const FeatureVector& global, const FeatureVector& local,
                   const Vec3& p) {
  if (global.size() != model.global_dim() || local.size() != model.local_dim()) {
    throw Error(ErrorKind::ShapeError, "feature dims " + std::to_string(global.size()) + "/" +
                                           std::to_string(local.size()) + " do not match model " +
                                           std::to_string(model.global_dim()) + "/" +
                                           std::to_string(model.local_dim()));
  }
  return {Eigen::MatrixXd(p), Eigen::MatrixXd(global), Eigen::MatrixXd(local)};
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::two_stream: return "two_stream";
    case Variant::one_stream: return "one_stream";
    case Variant::binary: return "binary";
  }
  return "two_stream";
}

Variant variant_from_string(const std::string& name) {
  if (name == "two_stream") return Variant::two_stream;
  if (name == "one_stream") return Variant::one_stream;
  if (name == "binary") return Variant::binary;
  throw Error(ErrorKind::ParseError, "unknown model variant '" + name + "'");
}

const char* to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::encoder: return "encoder";
    case ParamGroup::point_lift: return "point_lift";
    case ParamGroup::global_decoder: return "global_decoder";
    case ParamGroup::local_decoder: return "local_decoder";
  }
  return "encoder";
}

int SdfModel::global_dim() const {
  return encoder.layers.empty() ? 0 : encoder.layers.back().out_channels;
}

int SdfModel::local_dim() const {
  int n = 0;
  for (const auto& l : encoder.layers) n += l.out_channels;
  return n;
}

void SdfModel::validate() const {
  encoder.validate();
  point_lift.validate();
  global_decoder.validate();
  local_decoder.validate();
  if (point_lift.in_dim() != 3) throw Error(ErrorKind::ShapeError, "point lift must take 3D input");
  const int pd = point_dim();
  auto check_decoder = [](const MlpParams& d, int in, const char* name) {
    if (d.in_dim() != in || d.out_dim() != 1 || d.layers.back().activation != Activation::linear) {
      throw Error(ErrorKind::ShapeError, std::string(name) + " must map " + std::to_string(in) +
                                             " inputs to one linear output");
    }
  };
  if (variant == Variant::one_stream) {
    check_decoder(global_decoder, pd + global_dim() + local_dim(), "decoder");
    if (!local_decoder.empty()) throw Error(ErrorKind::ShapeError, "one-stream model has a local decoder");
  } else {
    check_decoder(global_decoder, pd + global_dim(), "global decoder");
    check_decoder(local_decoder, pd + local_dim(), "local decoder");
  }
}

SdfModel make_model(const ModelDims& dims, Variant variant, std::uint64_t seed) {
  SdfModel m;
  m.variant = variant;
  m.encoder = make_encoder(dims.image_width, dims.image_height, dims.image_channels,
                           dims.encoder_channels, seed * 4 + 0);
  m.point_lift = make_mlp(with_ends(3, std::vector<int>(dims.point_lift.begin(), dims.point_lift.end() - 1),
                                    dims.point_lift.back()),
                          Activation::relu, Activation::relu, seed * 4 + 1);
  const int pd = m.point_dim();
  if (variant == Variant::one_stream) {
    m.global_decoder = make_mlp(with_ends(pd + m.global_dim() + m.local_dim(), dims.decoder_hidden, 1),
                                Activation::relu, Activation::linear, seed * 4 + 2);
  } else {
    m.global_decoder = make_mlp(with_ends(pd + m.global_dim(), dims.decoder_hidden, 1), Activation::relu,
                                Activation::linear, seed * 4 + 2);
    m.local_decoder = make_mlp(with_ends(pd + m.local_dim(), dims.decoder_hidden, 1), Activation::relu,
                               Activation::linear, seed * 4 + 3);
  }
  m.validate();
  return m;
}

SdfModel zeros_like(const SdfModel& model) {
  SdfModel z = model;
  for (auto& block : parameter_blocks(z)) std::fill(block.values.begin(), block.values.end(), 0.0);
  return z;
}

SdfModel restrict_to_global(SdfModel model) {
  model.local_decoder = zeros_like(model.local_decoder);
  model.local_stream = false;
  return model;
}

std::vector<ParamBlock> parameter_blocks(SdfModel& model) {
  std::vector<ParamBlock> out;
  for (auto& layer : model.encoder.layers) {
    out.push_back({ParamGroup::encoder, layer.kernel});
    out.push_back({ParamGroup::encoder, layer.bias});
  }
  auto add = [&](MlpParams& mlp, ParamGroup g) {
    for (auto& l : mlp.layers) {
      out.push_back({g, std::span<double>(l.weight.data(), static_cast<std::size_t>(l.weight.size()))});
      out.push_back({g, std::span<double>(l.bias.data(), static_cast<std::size_t>(l.bias.size()))});
    }
  };
  add(model.point_lift, ParamGroup::point_lift);
  add(model.global_decoder, ParamGroup::global_decoder);
  add(model.local_decoder, ParamGroup::local_decoder);
  return out;
}

std::size_t parameter_count(const SdfModel& model) {
  std::size_t n = 0;
  for (const auto& b : parameter_blocks(const_cast<SdfModel&>(model))) n += b.values.size();
  return n;
}

FeatureVector lift_point(const Vec3& p, const MlpParams& params) {
  if (params.in_dim() != 3) throw Error(ErrorKind::ShapeError, "point lift must take 3D input");
  return mlp_forward(params, p);
}

ForwardTrace forward_batch(const SdfModel& model, const BatchInputs& in) {
  check_batch(model, in);
  ForwardTrace t;
  t.lift = mlp_forward_batch(model.point_lift, in.points);
  const Eigen::MatrixXd& feat = t.lift.output();
  if (model.variant == Variant::one_stream) {
    t.global_stream = mlp_forward_batch(model.global_decoder, stack_rows({&feat, &in.global, &in.local}));
    t.output = t.global_stream.output().row(0);
    return t;
  }
  t.global_stream = mlp_forward_batch(model.global_decoder, stack_rows({&feat, &in.global}));
  t.output = t.global_stream.output().row(0);
  if (model.uses_local_decoder()) {
    t.local_stream = mlp_forward_batch(model.local_decoder, stack_rows({&feat, &in.local}));
    t.output += t.local_stream.output().row(0);
  }
  return t;
}

InputGradients backward_batch(const SdfModel& model, const ForwardTrace& trace,
                              const Eigen::RowVectorXd& grad_output, SdfModel& grads) {
  const Eigen::Index b = grad_output.size();
  const int pd = model.point_dim();
  const int gd = model.global_dim();
  const int ld = model.local_dim();
  InputGradients out{Eigen::MatrixXd::Zero(gd, b), Eigen::MatrixXd::Zero(ld, b)};
  Eigen::MatrixXd d_feat = Eigen::MatrixXd::Zero(pd, b);

  const Eigen::MatrixXd g = grad_output;
  const Eigen::MatrixXd d_global_in = mlp_backward(model.global_decoder, trace.global_stream, g, grads.global_decoder);
  d_feat += d_global_in.topRows(pd);
  out.global = d_global_in.middleRows(pd, gd);
  if (model.variant == Variant::one_stream) {
    out.local = d_global_in.bottomRows(ld);
  } else if (model.uses_local_decoder()) {
    const Eigen::MatrixXd d_local_in = mlp_backward(model.local_decoder, trace.local_stream, g, grads.local_decoder);
    d_feat += d_local_in.topRows(pd);
    out.local = d_local_in.bottomRows(ld);
  }
  mlp_backward(model.point_lift, trace.lift, std::move(d_feat), grads.point_lift);
  return out;
}

Eigen::RowVectorXd field_values(const SdfModel& model, const BatchInputs& in) {
  Eigen::RowVectorXd out = forward_batch(model, in).output;
  if (model.variant == Variant::binary) out = -out;
  return out;
}

double predict_sdf(const SdfModel& model, const FeatureVector& global, const FeatureVector& local,
                   const Vec3& p) {
  if (model.variant != Variant::two_stream) {
    throw Error(ErrorKind::ShapeError, "predict_sdf needs a two-stream model");
  }
  return forward_batch(model, single(model, global, local, p)).output[0];
}

double predict_sdf_one_stream(const SdfModel& model, const FeatureVector& global,
                              const FeatureVector& local, const Vec3& p) {
  if (model.variant != Variant::one_stream) {
    throw Error(ErrorKind::ShapeError, "predict_sdf_one_stream needs a one-stream model");
  }
  return forward_batch(model, single(model, global, local, p)).output[0];
}

double predict_inside_prob(const SdfModel& model, const FeatureVector& global,
                           const FeatureVector& local, const Vec3& p) {
  if (model.variant != Variant::binary) {
    throw Error(ErrorKind::ShapeError, "predict_inside_prob needs a binary model");
  }
  return sigmoid(forward_batch(model, single(model, global, local, p)).output[0]);
}

}  // namespace sdfield
