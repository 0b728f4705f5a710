#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "swahr/heatmap.hpp"
#include "swahr/losses.hpp"
#include "swahr/rng.hpp"

using namespace swahr;

namespace {

struct Instance {
  HeatmapStack pred{3, 8, 8};
  HeatmapStack base{3, 8, 8};
  AlphaField alpha{3, 8, 8};
};

// base mixes exact zeros (background) with positive cells so the support
// mask exercises both branches
Instance random_instance(uint64_t seed) {
  Instance in;
  Rng rng(seed);
  for (size_t i = 0; i < in.pred.size(); ++i) {
    in.pred.data()[i] = float(rng.uniform(-0.1, 1.1));
    in.base.data()[i] =
        rng.uniform() < 0.5 ? 0.0f : float(rng.uniform(0.05, 1.0));
    in.alpha.data()[i] = float(rng.uniform(-0.3, 0.3));
  }
  return in;
}

double rel_err(const Tensor3& got, const Tensor3& want) {
  double worst = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    const double a = double(got.data()[i]);
    const double b = double(want.data()[i]);
    const double mag = std::max(std::abs(a), std::abs(b));
    if (mag < 1e-8) continue;  // both effectively zero
    worst = std::max(worst, std::abs(a - b) / mag);
  }
  return worst;
}

// finite differences of the objective grad_loss differentiates: the true
// loss for base/sahr, the frozen-weight surrogate for the weighted variants
// (weights are stop-gradient constants there)
double check_variant(LossVariant v, uint64_t seed, double lambda,
                     double gamma) {
  const Instance in = random_instance(seed);
  const GradientPair g = grad_loss(v, in.pred, in.base, in.alpha, lambda, gamma);

  const bool weighted = v == LossVariant::wahr || v == LossVariant::swahr;
  const bool scaled = v == LossVariant::sahr || v == LossVariant::swahr;
  // frozen weights at the evaluation point, kept in double so the finite
  // differences are not limited by float32 target quantization
  std::vector<double> w0(in.pred.size(), 1.0);
  if (weighted) {
    for (size_t i = 0; i < in.pred.size(); ++i) {
      const double b = double(in.base.data()[i]);
      const double t0 =
          scaled ? sahr_taylor_value(b, double(in.alpha.data()[i])) : b;
      w0[i] = wahr_weight_value(double(in.pred.data()[i]), t0, gamma);
    }
  }
  const Mask3 mask = support_mask(in.base);

  auto objective = [&](const HeatmapStack& pred, const AlphaField& alpha) {
    if (!weighted) {
      return scaled ? total_sahr_loss(pred, in.base, alpha, lambda).total
                    : l2_loss(pred, in.base);
    }
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
      const double b = double(in.base.data()[i]);
      const double t =
          scaled ? sahr_taylor_value(b, double(alpha.data()[i])) : b;
      const double r = double(pred.data()[i]) - t;
      acc += w0[i] * r * r;
    }
    double loss = acc / double(pred.size());
    if (scaled) loss += lambda * regularizer_loss(alpha, mask);
    return loss;
  };

  const Tensor3 fd_pred = finite_diff_grad(
      [&](const Tensor3& p) { return objective(p, in.alpha); }, in.pred);
  double worst = rel_err(g.d_pred, fd_pred);

  if (scaled) {
    const Tensor3 fd_alpha = finite_diff_grad(
        [&](const Tensor3& a) { return objective(in.pred, a); }, in.alpha);
    worst = std::max(worst, rel_err(g.d_alpha, fd_alpha));
  } else {
    for (size_t i = 0; i < g.d_alpha.size(); ++i)
      CHECK(g.d_alpha.data()[i] == 0.0f);
  }
  return worst;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences") {
  const std::vector<double> lambdas = {0.5, 1.0, 4.0};
  const std::vector<double> gammas = {0.01, 0.5, 1.0};
  int idx = 0;
  for (auto v : {LossVariant::base, LossVariant::sahr, LossVariant::wahr,
                 LossVariant::swahr}) {
    double worst = 0.0;
    for (int i = 0; i < 24; ++i, ++idx) {
      const double lambda = lambdas[size_t(i) % lambdas.size()];
      const double gamma = gammas[size_t(i / 3) % gammas.size()];
      worst = std::max(worst,
                       check_variant(v, 1000 + uint64_t(idx), lambda, gamma));
    }
    INFO("variant " << variant_name(v));
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("gradient of the frozen-scale mode ignores alpha") {
  const Instance in = random_instance(77);
  const double inf = std::numeric_limits<double>::infinity();
  const GradientPair g =
      grad_loss(LossVariant::sahr, in.pred, in.base, in.alpha, inf, 0.01);
  // target degenerates to base; prediction gradient is the plain l2 one
  const GradientPair gb =
      grad_loss(LossVariant::base, in.pred, in.base, in.alpha, 1.0, 0.01);
  for (size_t i = 0; i < g.d_pred.size(); ++i) {
    CHECK(g.d_pred.data()[i] == gb.d_pred.data()[i]);
    CHECK(g.d_alpha.data()[i] == 0.0f);
  }
}
