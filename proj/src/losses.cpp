#include "swahr/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "swahr/heatmap.hpp"
#include "swahr/kernels.hpp"

namespace swahr {

const char* variant_name(LossVariant v) {
  switch (v) {
    case LossVariant::base:
      return "base";
    case LossVariant::shr:
      return "shr";
    case LossVariant::sahr:
      return "sahr";
    case LossVariant::wahr:
      return "wahr";
    case LossVariant::swahr:
      return "swahr";
  }
  return "?";
}

LossVariant variant_from_name(const std::string& name) {
  if (name == "base") return LossVariant::base;
  if (name == "shr") return LossVariant::shr;
  if (name == "sahr") return LossVariant::sahr;
  if (name == "wahr") return LossVariant::wahr;
  if (name == "swahr") return LossVariant::swahr;
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected base, shr, sahr, wahr or swahr)");
}

namespace {
void check_gamma(double gamma) {
  if (!(gamma > 0.0)) {
    throw std::domain_error("gamma must be > 0, got " + std::to_string(gamma));
  }
}

void check_lambda(double lambda) {
  // +inf is the frozen-scale limit and is allowed
  if (std::isnan(lambda) || lambda < 0.0) {
    throw std::domain_error("lambda must be >= 0 or +inf");
  }
}
}  // namespace

double l2_loss(const HeatmapStack& pred, const HeatmapStack& target) {
  require_same_shape(pred, target);
  const size_t n = pred.size();
  if (n == 0) return 0.0;
  return kernels::sum_sq_diff(pred.data(), target.data(), n) / double(n);
}

double weighted_l2_loss(const HeatmapStack& pred, const HeatmapStack& target,
                        const WeightField& weights) {
  require_same_shape(pred, target);
  require_same_shape(pred, weights);
  const size_t n = pred.size();
  if (n == 0) return 0.0;
  return kernels::weighted_sum_sq_diff(pred.data(), target.data(),
                                       weights.data(), n) /
         double(n);
}

double regularizer_loss(const AlphaField& alpha, const Mask3& mask) {
  require_same_shape(alpha, mask);
  const size_t m = mask.count();
  if (m == 0) return 0.0;
  return kernels::masked_sum_sq(alpha.data(), mask.data.data(), alpha.size()) /
         double(m);
}

LossReport total_sahr_loss(const HeatmapStack& pred, const HeatmapStack& base,
                           const AlphaField& alpha, double lambda) {
  require_same_shape(pred, base);
  require_same_shape(pred, alpha);
  check_lambda(lambda);
  LossReport rep;
  rep.lambda = lambda;
  rep.element_count = pred.size();
  const size_t n = pred.size();
  if (n == 0) return rep;
  const float* pp = pred.data();
  const float* bp = base.data();
  if (std::isinf(lambda)) {
    // frozen scale field: alpha pinned at 0, target degenerates to base
    rep.regression = kernels::sum_sq_diff(pp, bp, n) / double(n);
    rep.regularizer = 0.0;
    rep.total = rep.regression;
    return rep;
  }
  const float* ap = alpha.data();
  rep.regression = kernels::reduce(n,
                                   [pp, bp, ap](size_t i) {
                                     const double t = sahr_taylor_value(
                                         double(bp[i]), double(ap[i]));
                                     const double d = double(pp[i]) - t;
                                     return d * d;
                                   }) /
                   double(n);
  rep.regularizer = regularizer_loss(alpha, support_mask(base));
  rep.total = rep.regression + lambda * rep.regularizer;
  return rep;
}

double wahr_weight_value(double pred, double target, double gamma) {
  check_gamma(gamma);
  const double tg = target <= 0.0 ? 0.0 : std::pow(target, gamma);
  return tg * std::abs(1.0 - pred) + std::abs(pred) * (1.0 - tg);
}

WeightField wahr_weights(const HeatmapStack& pred, const HeatmapStack& target,
                         double gamma) {
  require_same_shape(pred, target);
  check_gamma(gamma);
  WeightField w(pred.channels(), pred.height(), pred.width());
  const float* pp = pred.data();
  const float* tp = target.data();
  float* wp = w.data();
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < (long long)pred.size(); ++i) {
    wp[i] = float(wahr_weight_value(double(pp[i]), double(tp[i]), gamma));
  }
  return w;
}

double soft_boundary(double gamma) {
  check_gamma(gamma);
  return std::exp2(-1.0 / gamma);
}

double wahr_loss(const HeatmapStack& pred, const HeatmapStack& target,
                 double gamma) {
  require_same_shape(pred, target);
  check_gamma(gamma);
  const size_t n = pred.size();
  if (n == 0) return 0.0;
  const float* pp = pred.data();
  const float* tp = target.data();
  return kernels::reduce(n,
                         [pp, tp, gamma](size_t i) {
                           const double p = double(pp[i]);
                           const double t = double(tp[i]);
                           const double d = p - t;
                           return wahr_weight_value(p, t, gamma) * d * d;
                         }) /
         double(n);
}

LossReport swahr_loss(const HeatmapStack& pred, const HeatmapStack& base,
                      const AlphaField& alpha, double lambda, double gamma) {
  require_same_shape(pred, base);
  require_same_shape(pred, alpha);
  check_lambda(lambda);
  check_gamma(gamma);
  LossReport rep;
  rep.lambda = lambda;
  rep.gamma = gamma;
  rep.element_count = pred.size();
  const size_t n = pred.size();
  if (n == 0) return rep;
  const float* pp = pred.data();
  const float* bp = base.data();
  const float* ap = alpha.data();
  const bool frozen = std::isinf(lambda);
  rep.regression =
      kernels::reduce(n,
                      [pp, bp, ap, gamma, frozen](size_t i) {
                        const double p = double(pp[i]);
                        const double t =
                            frozen ? double(bp[i])
                                   : sahr_taylor_value(double(bp[i]),
                                                       double(ap[i]));
                        const double d = p - t;
                        return wahr_weight_value(p, t, gamma) * d * d;
                      }) /
      double(n);
  rep.regularizer =
      frozen ? 0.0 : regularizer_loss(alpha, support_mask(base));
  rep.total = rep.regression +
              (frozen ? 0.0 : lambda * rep.regularizer);
  return rep;
}

GradientPair grad_loss(LossVariant variant, const HeatmapStack& pred,
                       const HeatmapStack& base, const AlphaField& alpha,
                       double lambda, double gamma) {
  require_same_shape(pred, base);
  require_same_shape(pred, alpha);
  if (variant == LossVariant::shr) {
    throw std::invalid_argument(
        "grad_loss: shr targets are precomputed; differentiate as base "
        "against the transformed stack");
  }
  const bool scaled =
      variant == LossVariant::sahr || variant == LossVariant::swahr;
  const bool weighted =
      variant == LossVariant::wahr || variant == LossVariant::swahr;
  if (scaled) check_lambda(lambda);
  if (weighted) check_gamma(gamma);
  const bool frozen = scaled && std::isinf(lambda);

  GradientPair g{Tensor3(pred.channels(), pred.height(), pred.width()),
                 Tensor3(pred.channels(), pred.height(), pred.width())};
  const size_t n = pred.size();
  if (n == 0) return g;

  Mask3 mask;
  size_t m = 0;
  if (scaled && !frozen) {
    mask = support_mask(base);
    m = mask.count();
  }

  const float* pp = pred.data();
  const float* bp = base.data();
  const float* ap = alpha.data();
  const uint8_t* mp = mask.data.empty() ? nullptr : mask.data.data();
  float* dp = g.d_pred.data();
  float* da = g.d_alpha.data();
  const double inv_n = 1.0 / double(n);
  const double reg_coeff = (m > 0) ? 2.0 * lambda / double(m) : 0.0;

  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < (long long)n; ++i) {
    const double p = double(pp[i]);
    const double b = double(bp[i]);
    const double a = double(ap[i]);
    double t = b;
    double dt = 0.0;
    if (scaled && !frozen) {
      t = sahr_taylor_value(b, a);
      dt = sahr_taylor_dalpha(b, a);
    }
    const double w = weighted ? wahr_weight_value(p, t, gamma) : 1.0;
    const double r = p - t;
    dp[i] = float(2.0 * w * r * inv_n);
    double ga = 0.0;
    if (scaled && !frozen) {
      ga = -2.0 * w * r * dt * inv_n;
      if (mp && mp[i]) ga += reg_coeff * a;
    }
    da[i] = float(ga);
  }
  return g;
}

Tensor3 finite_diff_grad(const std::function<double(const Tensor3&)>& f,
                         const Tensor3& at, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("finite_diff_grad: epsilon must be > 0");
  }
  Tensor3 point = at;
  Tensor3 grad(at.channels(), at.height(), at.width());
  for (size_t i = 0; i < point.size(); ++i) {
    const float saved = point.data()[i];
    const float hi = float(double(saved) + epsilon);
    const float lo = float(double(saved) - epsilon);
    point.data()[i] = hi;
    const double f_hi = f(point);
    point.data()[i] = lo;
    const double f_lo = f(point);
    point.data()[i] = saved;
    const double h = double(hi) - double(lo);
    grad.data()[i] = h != 0.0 ? float((f_hi - f_lo) / h) : 0.0f;
  }
  return grad;
}

}  // namespace swahr
