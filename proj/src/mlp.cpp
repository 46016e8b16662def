#include "sdfield/mlp.hpp"

#include <cmath>
#include <random>

#include "sdfield/error.hpp"

namespace sdfield {

namespace {

void activate(Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::linear: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::sigmoid: z = (1.0 + (-z.array()).exp()).inverse().matrix(); break;
  }
}

// grad <- grad * f'(z), expressed through the activation output y = f(z).
void activate_backward(Eigen::MatrixXd& grad, const Eigen::MatrixXd& y, Activation a) {
  switch (a) {
    case Activation::linear: break;
    case Activation::relu: grad = (y.array() > 0.0).select(grad, 0.0); break;
    case Activation::sigmoid: grad = grad.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())); break;
  }
}

}  // namespace

const char* to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "linear";
}

Activation activation_from_string(const std::string& name) {
  if (name == "linear") return Activation::linear;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  throw Error(ErrorKind::ParseError, "unknown activation '" + name + "'");
}

std::vector<int> MlpParams::dims() const {
  std::vector<int> d;
  if (layers.empty()) return d;
  d.push_back(layers.front().in_dim());
  for (const auto& l : layers) d.push_back(l.out_dim());
  return d;
}

void MlpParams::validate() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.weight.rows() || l.weight.rows() < 1 || l.weight.cols() < 1 ||
        (i > 0 && layers[i - 1].out_dim() != l.in_dim())) {
      throw Error(ErrorKind::ShapeError, "MLP layer " + std::to_string(i) + " does not chain");
    }
  }
}

MlpParams make_mlp(const std::vector<int>& dims, Activation hidden, Activation output,
                   std::uint64_t seed) {
  if (dims.size() < 2) throw Error(ErrorKind::ShapeError, "MLP needs at least one layer");
  std::mt19937_64 rng(seed);
  MlpParams p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer layer;
    const int in = dims[i];
    const int out = dims[i + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weight.resize(out, in);
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) {
      layer.weight.data()[k] = static_cast<float>(dist(rng));
    }
    layer.bias = Eigen::VectorXd::Zero(out);
    layer.activation = i + 2 == dims.size() ? output : hidden;
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams zeros_like(const MlpParams& p) {
  MlpParams z = p;
  for (auto& l : z.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return z;
}

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x) {
  return mlp_forward_batch(p, x).output().col(0);
}

MlpTrace mlp_forward_batch(const MlpParams& p, const Eigen::MatrixXd& x) {
  if (p.layers.empty() || x.rows() != p.in_dim()) {
    throw Error(ErrorKind::ShapeError, "MLP expects input dim " + std::to_string(p.in_dim()) +
                                           ", got " + std::to_string(x.rows()));
  }
  MlpTrace trace;
  trace.acts.reserve(p.layers.size() + 1);
  trace.acts.push_back(x);
  for (const auto& l : p.layers) {
    Eigen::MatrixXd z = l.weight * trace.acts.back();
    z.colwise() += l.bias;
    activate(z, l.activation);
    trace.acts.push_back(std::move(z));
  }
  return trace;
}

Eigen::MatrixXd mlp_backward(const MlpParams& p, const MlpTrace& trace, Eigen::MatrixXd grad_out,
                             MlpParams& grads) {
  for (std::size_t i = p.layers.size(); i-- > 0;) {
    const auto& l = p.layers[i];
    activate_backward(grad_out, trace.acts[i + 1], l.activation);
    grads.layers[i].weight.noalias() += grad_out * trace.acts[i].transpose();
    grads.layers[i].bias += grad_out.rowwise().sum();
    grad_out = (l.weight.transpose() * grad_out).eval();
  }
  return grad_out;
}

}  // namespace sdfield
