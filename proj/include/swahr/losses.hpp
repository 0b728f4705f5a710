#pragma once

#include <functional>
#include <optional>
#include <string>

#include "swahr/grid.hpp"

namespace swahr {

enum class LossVariant { base, shr, sahr, wahr, swahr };

const char* variant_name(LossVariant v);
LossVariant variant_from_name(const std::string& name);

struct LossReport {
  double regression = 0.0;
  double regularizer = 0.0;
  double total = 0.0;
  double lambda = 0.0;
  std::optional<double> gamma;  // set for the weighted variants
  size_t element_count = 0;
};

struct GradientPair {
  Tensor3 d_pred;
  Tensor3 d_alpha;
};

// Mean squared error over all elements.
double l2_loss(const HeatmapStack& pred, const HeatmapStack& target);

// Same, with a fixed per-element weight field.
double weighted_l2_loss(const HeatmapStack& pred, const HeatmapStack& target,
                        const WeightField& weights);

// Mean of alpha^2 over the masked cells; 0 when the mask is empty.
double regularizer_loss(const AlphaField& alpha, const Mask3& mask);

// Regression against the Taylor-form scale-adaptive target plus
// lambda * regularizer over the support of `base`. lambda = +inf freezes
// the scale field: the target degenerates to `base` and the regularizer
// term is dropped.
LossReport total_sahr_loss(const HeatmapStack& pred, const HeatmapStack& base,
                           const AlphaField& alpha, double lambda);

// Weight for one cell: target^gamma * |1 - pred| + |pred| * (1 - target^gamma),
// with 0^gamma defined as 0. gamma must be > 0.
double wahr_weight_value(double pred, double target, double gamma);
WeightField wahr_weights(const HeatmapStack& pred, const HeatmapStack& target,
                         double gamma);

// Target value at which the two weight terms balance for pred in [0, 1]:
// p = 2^(-1/gamma). Below it the |pred| term dominates.
double soft_boundary(double gamma);

// Weighted regression with W recomputed from the current prediction.
// W is a constant in the gradient (stop-gradient).
double wahr_loss(const HeatmapStack& pred, const HeatmapStack& target,
                 double gamma);

// Weight-adaptive regression against the scale-adaptive target, plus the
// scale regularizer. Composition of the two mechanisms above.
LossReport swahr_loss(const HeatmapStack& pred, const HeatmapStack& base,
                      const AlphaField& alpha, double lambda, double gamma);

// Analytic gradients of the selected variant's total loss with respect to
// the prediction and the alpha field, mean-reduction convention, weights
// treated as constants. For base and wahr, d_alpha is identically zero.
GradientPair grad_loss(LossVariant variant, const HeatmapStack& pred,
                       const HeatmapStack& base, const AlphaField& alpha,
                       double lambda, double gamma);

// Central finite differences of an arbitrary scalar function of a stack,
// element by element. The divisor is the actually realized float32
// difference, not 2*epsilon, so the estimate is exact at float resolution.
Tensor3 finite_diff_grad(const std::function<double(const Tensor3&)>& f,
                         const Tensor3& at, double epsilon = 1e-4);

}  // namespace swahr
