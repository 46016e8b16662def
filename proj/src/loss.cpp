#include "sdfield/loss.hpp"

#include <cmath>

#include "sdfield/error.hpp"

namespace sdfield {

void LossParams::validate() const {
  if (!(m1 > 0.0) || !(m2 > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::InvalidArgument, "loss weights must be positive");
  }
}

double sdf_loss(double pred, double gt, const LossParams& lp) {
  const double m = gt < lp.delta ? lp.m1 : lp.m2;
  return m * std::abs(pred - gt);
}

double sdf_loss_grad(double pred, double gt, const LossParams& lp) {
  const double m = gt < lp.delta ? lp.m1 : lp.m2;
  const double r = pred - gt;
  return r > 0.0 ? m : (r < 0.0 ? -m : 0.0);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double binary_loss(double prob, double gt) {
  return gt < 0.0 ? -std::log(prob) : -std::log1p(-prob);
}

double binary_loss_from_logit(double logit, double gt) {
  // softplus(z) - y * z
  const double softplus = logit > 0.0 ? logit + std::log1p(std::exp(-logit)) : std::log1p(std::exp(logit));
  return softplus - (gt < 0.0 ? logit : 0.0);
}

double binary_loss_logit_grad(double logit, double gt) {
  return sigmoid(logit) - (gt < 0.0 ? 1.0 : 0.0);
}

}  // namespace sdfield
