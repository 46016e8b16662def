#pragma once

namespace sdfield {

// Weighted L1: m * |pred - gt| with m = m1 when gt < delta (one-sided, so
// every interior point takes m1) and m2 otherwise.
struct LossParams {
  double m1 = 4.0;
  double m2 = 1.0;
  double delta = 0.01;

  void validate() const;
};

double sdf_loss(double pred, double gt, const LossParams& lp);
// d(sdf_loss)/d(pred); the L1 subgradient at zero residual is 0.
double sdf_loss_grad(double pred, double gt, const LossParams& lp);

// Cross entropy against label = (gt < 0).
double binary_loss(double prob, double gt);
// Same loss from the logit, numerically stable; grad is d/d(logit).
double binary_loss_from_logit(double logit, double gt);
double binary_loss_logit_grad(double logit, double gt);

double sigmoid(double z);

}  // namespace sdfield
