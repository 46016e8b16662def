#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sdfield {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { linear, relu, sigmoid };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  RowMatrix weight;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::relu;

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  bool empty() const { return layers.empty(); }
  int in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  int out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
  // dims = {in, h1, ..., out}
  std::vector<int> dims() const;
  // Throws ShapeError if consecutive layers do not chain.
  void validate() const;
};

// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases, rounded to f32.
MlpParams make_mlp(const std::vector<int>& dims, Activation hidden, Activation output,
                   std::uint64_t seed);
MlpParams zeros_like(const MlpParams& p);

// Activations for a batch of column inputs; acts[0] is the input.
struct MlpTrace {
  std::vector<Eigen::MatrixXd> acts;
  const Eigen::MatrixXd& output() const { return acts.back(); }
};

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x);
MlpTrace mlp_forward_batch(const MlpParams& p, const Eigen::MatrixXd& x);

// Accumulates parameter gradients into grads and returns d(loss)/d(input).
Eigen::MatrixXd mlp_backward(const MlpParams& p, const MlpTrace& trace, Eigen::MatrixXd grad_out,
                             MlpParams& grads);

}  // namespace sdfield
