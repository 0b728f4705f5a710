#include "swahr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "swahr/decoder.hpp"
#include "swahr/evaluator.hpp"
#include "swahr/heatmap.hpp"
#include "swahr/kernels.hpp"

namespace swahr {

double pred_from_param(double u) {
  return -0.05 + 1.1 / (1.0 + std::exp(-u));
}

double param_from_pred(double p) {
  if (!(p > -0.05 && p < 1.05)) {
    throw std::domain_error("param_from_pred: value " + std::to_string(p) +
                            " outside (-0.05, 1.05)");
  }
  return std::log((p + 0.05) / (1.05 - p));
}

namespace {
constexpr double kFitScoreFloor = 0.25;

std::vector<Detection> decode_refined(const HeatmapStack& pred,
                                      int max_per_channel, double floor) {
  std::vector<Detection> dets = find_peaks(pred, max_per_channel, floor);
  for (Detection& d : dets) d = refine_subpixel(pred, d);
  return dets;
}

// distance from each labeled (person, keypoint) to the nearest detection in
// its channel; channels without a detection cost the canvas diagonal
std::vector<double> localization_errors_for(
    const std::vector<PersonInstance>& persons,
    const std::vector<Detection>& dets, int height, int width) {
  const double miss = std::hypot(double(width), double(height));
  std::vector<double> errs;
  for (const PersonInstance& person : persons) {
    for (size_t k = 0; k < person.keypoints.size(); ++k) {
      const KeypointAnnotation& kp = person.keypoints[k];
      if (kp.visibility == 0) continue;
      double best = miss;
      bool found = false;
      for (const Detection& d : dets) {
        if (d.channel != int(k)) continue;
        const double dist =
            std::hypot(d.x - double(kp.x), d.y - double(kp.y));
        if (!found || dist < best) {
          best = dist;
          found = true;
        }
      }
      errs.push_back(found ? best : miss);
    }
  }
  return errs;
}
}  // namespace

FitResult fit_direct(const SyntheticScene& scene, const FitConfig& cfg) {
  if (scene.persons.empty()) {
    throw std::invalid_argument("fit: scene has no persons");
  }
  if (scene.persons.size() != scene.noisy_persons.size()) {
    throw std::invalid_argument("fit: scene annotation lists disagree");
  }
  if (cfg.steps < 0) {
    throw std::invalid_argument("fit: steps must be >= 0");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("fit: learning rate must be > 0");
  }
  if (!(cfg.sigma0 > 0.0f)) {
    throw std::invalid_argument("fit: sigma0 must be > 0");
  }
  const bool scaled =
      cfg.variant == LossVariant::sahr || cfg.variant == LossVariant::swahr;
  const bool weighted =
      cfg.variant == LossVariant::wahr || cfg.variant == LossVariant::swahr;
  if (scaled && (std::isnan(cfg.lambda) || cfg.lambda < 0.0)) {
    throw std::domain_error("fit: lambda must be >= 0 or +inf");
  }
  if (weighted && !(cfg.gamma > 0.0)) {
    throw std::domain_error("fit: gamma must be > 0");
  }
  const bool frozen = scaled && std::isinf(cfg.lambda);
  const bool use_alpha = scaled && !frozen;

  const int K = int(scene.persons[0].keypoints.size());
  const StackShape shape{K, scene.height, scene.width};
  const size_t n = size_t(K) * size_t(scene.height) * size_t(scene.width);

  // The target is the encoding of the scene's noisy annotations: label
  // jitter (applied before encoding) is the supervision the fit sees.
  const HeatmapStack base = encode_gaussian(scene.noisy_persons, cfg.sigma0,
                                            shape);
  std::vector<float> log_b(n);  // ln(max(base, kLogFloor))
  for (size_t e = 0; e < n; ++e) {
    log_b[e] = float(std::log(std::max(double(base.data()[e]), kLogFloor)));
  }
  HeatmapStack shr_target;
  if (cfg.variant == LossVariant::shr) {
    std::vector<double> scales(scene.noisy_persons.size());
    for (size_t p = 0; p < scales.size(); ++p) {
      scales[p] = shr_scale_from_bbox(double(scene.noisy_persons[p].bbox.w));
    }
    shr_target = sahr_exact(base, rasterize_scale_field(scene.noisy_persons,
                                                        scales, cfg.sigma0,
                                                        shape));
  }

  // support statistics, fixed over steps
  Mask3 mask;
  double inv_m = 0.0;
  if (use_alpha) {
    mask = support_mask(base);
    const size_t m = mask.count();
    inv_m = m > 0 ? 1.0 / double(m) : 0.0;
  }

  std::vector<double> u(n);
  Rng pr(cfg.seed);
  for (size_t e = 0; e < n; ++e) u[e] = 0.01 * pr.normal();
  std::vector<double> a;
  if (use_alpha) a.assign(n, 0.0);

  FitResult res;
  res.loss_curve.reserve(size_t(cfg.steps));

  std::vector<double> P(n), g_u(n), g_a;
  if (use_alpha) g_a.assign(n, 0.0);
  const double lr = cfg.learning_rate;
  const float* bp = base.data();
  const float* sp =
      cfg.variant == LossVariant::shr ? shr_target.data() : nullptr;

  for (int step = 0; step < cfg.steps; ++step) {
    for (size_t e = 0; e < n; ++e) P[e] = pred_from_param(u[e]);

    double regr_sum = 0.0;
    for (size_t e = 0; e < n; ++e) {
      const double b = double(bp[e]);
      double t, dt = 0.0;
      if (sp) {
        t = double(sp[e]);
      } else if (use_alpha) {
        const double l = double(log_b[e]);
        const double q = 1.0 + a[e] * l;
        t = 0.5 * b * (1.0 + q * q);
        dt = b * l * q;
      } else {
        t = b;
      }
      const double r = P[e] - t;
      double w = 1.0;
      if (weighted) {
        // t == 0 short-circuits the pow on the (dominant) background
        if (t <= 0.0) {
          w = std::abs(P[e]);
        } else {
          const double tg = std::pow(t, cfg.gamma);
          w = tg * std::abs(1.0 - P[e]) + std::abs(P[e]) * (1.0 - tg);
        }
      }
      regr_sum += w * r * r;
      g_u[e] = 2.0 * w * r;
      if (use_alpha) g_a[e] = -2.0 * w * r * dt;
    }

    LossReport rep;
    rep.element_count = n;
    rep.lambda = scaled ? cfg.lambda : 0.0;
    if (weighted) rep.gamma = cfg.gamma;
    rep.regression = regr_sum / double(n);
    if (use_alpha) {
      double regu = 0.0;
      for (size_t e = 0; e < n; ++e) {
        if (mask.data[e]) regu += a[e] * a[e];
      }
      regu *= inv_m;
      rep.regularizer = regu;
      rep.total = rep.regression + cfg.lambda * regu;
    } else {
      rep.regularizer = 0.0;
      rep.total = rep.regression;
    }
    if (!std::isfinite(rep.total)) {
      throw fit_divergence_error(
          step, "fit: loss became non-finite at step " + std::to_string(step) +
                    "; lower the learning rate");
    }
    res.loss_curve.push_back(rep);

    // summed per-element gradients: n (or m) times the mean-reduction
    // values reported above
    for (size_t e = 0; e < n; ++e) {
      const double dsq = (P[e] + 0.05) * (1.05 - P[e]) / 1.1;
      u[e] -= lr * g_u[e] * dsq;
    }
    if (use_alpha) {
      for (size_t e = 0; e < n; ++e) {
        const double reg = mask.data[e] ? 2.0 * cfg.lambda * a[e] : 0.0;
        a[e] -= lr * kAlphaLrRatio * (g_a[e] + reg);
      }
    }
  }

  res.final_pred = HeatmapStack(K, scene.height, scene.width);
  for (size_t e = 0; e < n; ++e) {
    res.final_pred.data()[e] = float(pred_from_param(u[e]));
  }
  res.final_scale = ScaleField(K, scene.height, scene.width, 1.0f);
  if (use_alpha) {
    for (size_t e = 0; e < n; ++e) {
      res.final_scale.data()[e] = float(1.0 / std::max(1.0 + a[e], 1e-6));
    }
  } else if (cfg.variant == LossVariant::shr) {
    std::vector<double> scales(scene.noisy_persons.size());
    for (size_t p = 0; p < scales.size(); ++p) {
      scales[p] = shr_scale_from_bbox(double(scene.noisy_persons[p].bbox.w));
    }
    res.final_scale = rasterize_scale_field(scene.noisy_persons, scales,
                                            cfg.sigma0, shape);
  }

  // mean fitted scale over each true person's keypoint support windows
  const double radius = 3.0 * double(cfg.sigma0);
  for (size_t p = 0; p < scene.persons.size(); ++p) {
    const PersonInstance& person = scene.persons[p];
    double sum = 0.0;
    size_t count = 0;
    for (size_t k = 0; k < person.keypoints.size(); ++k) {
      const KeypointAnnotation& kp = person.keypoints[k];
      if (kp.visibility == 0) continue;
      const int x0 = std::max(0, int(std::ceil(double(kp.x) - radius)));
      const int x1 =
          std::min(scene.width - 1, int(std::floor(double(kp.x) + radius)));
      const int y0 = std::max(0, int(std::ceil(double(kp.y) - radius)));
      const int y1 =
          std::min(scene.height - 1, int(std::floor(double(kp.y) + radius)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          sum += double(res.final_scale(int(k), x, y));
          ++count;
        }
      }
    }
    PersonScaleStat stat;
    stat.person = int(p);
    stat.bbox_width = double(person.bbox.w);
    stat.mean_scale = count > 0 ? sum / double(count) : 1.0;
    res.per_person_mean_scale.push_back(stat);
  }

  const std::vector<Detection> dets = decode_refined(
      res.final_pred, int(scene.persons.size()), kFitScoreFloor);
  res.localization_errors = localization_errors_for(
      scene.persons, dets, scene.height, scene.width);
  return res;
}

namespace {
FitConfig config_for(const FitConfig& base_cfg, const std::string& param,
                     const std::string& value) {
  FitConfig cfg = base_cfg;
  if (param == "lambda") {
    try {
      cfg.lambda = std::stod(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("sweep: bad lambda value '" + value + "'");
    }
    if (std::isnan(cfg.lambda) || cfg.lambda < 0.0) {
      throw std::invalid_argument("sweep: lambda must be >= 0 or inf");
    }
  } else if (param == "gamma") {
    try {
      cfg.gamma = std::stod(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("sweep: bad gamma value '" + value + "'");
    }
    if (!(cfg.gamma > 0.0)) {
      throw std::invalid_argument("sweep: gamma must be > 0");
    }
  } else if (param == "variant") {
    cfg.variant = variant_from_name(value);
  } else {
    throw std::invalid_argument("sweep: unknown param '" + param +
                                "' (expected lambda, gamma or variant)");
  }
  return cfg;
}
}  // namespace

std::vector<SweepRow> ablation_sweep(const std::vector<SyntheticScene>& scenes,
                                     const FitConfig& base_cfg,
                                     const std::string& param,
                                     const std::vector<std::string>& values) {
  if (scenes.empty()) {
    throw std::invalid_argument("sweep: no scenes");
  }
  if (values.empty()) {
    throw std::invalid_argument("sweep: no values");
  }
  for (const SyntheticScene& s : scenes) {
    if (s.persons.empty()) {
      throw std::invalid_argument("sweep: scene without persons");
    }
  }
  const int K = int(scenes[0].persons[0].keypoints.size());

  std::vector<FitConfig> cfgs;
  cfgs.reserve(values.size());
  for (const std::string& v : values) {
    cfgs.push_back(config_for(base_cfg, param, v));
  }

  const size_t n_jobs = values.size() * scenes.size();
  std::vector<std::vector<PoseGroup>> poses(n_jobs);
  std::vector<double> loc_mean(n_jobs, 0.0);

  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(dynamic) if (par)
  for (long long job = 0; job < (long long)n_jobs; ++job) {
    // fits stay single-threaded; parallelism is across (value, scene)
    kernels::BackendGuard guard(kernels::Backend::serial);
    const size_t vi = size_t(job) / scenes.size();
    const size_t si = size_t(job) % scenes.size();
    const SyntheticScene& scene = scenes[si];
    const FitResult fit = fit_direct(scene, cfgs[vi]);

    std::vector<Detection> dets = decode_refined(
        fit.final_pred, int(scene.persons.size()), kFitScoreFloor);
    // grouping oracle: constant per-person tags rasterized from the exact
    // annotations, spaced 2.0 apart, far-off background
    std::vector<double> tag_values(scene.persons.size());
    for (size_t p = 0; p < tag_values.size(); ++p) {
      tag_values[p] = 2.0 * double(p);
    }
    const Tensor3 tag_field = rasterize_person_field(
        scene.persons, tag_values, -1.0e6f, cfgs[vi].sigma0,
        StackShape{K, scene.height, scene.width});
    dets = attach_tags(dets, tag_field);
    std::vector<PoseGroup> groups = group_by_tags(dets, K, 1.0);
    for (PoseGroup& g : groups) g.image_id = int(si);
    poses[size_t(job)] = std::move(groups);

    double acc = 0.0;
    for (double e : fit.localization_errors) acc += e;
    loc_mean[size_t(job)] =
        fit.localization_errors.empty()
            ? 0.0
            : acc / double(fit.localization_errors.size());
  }

  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (size_t vi = 0; vi < values.size(); ++vi) {
    std::vector<std::vector<PoseGroup>> preds_per_image(scenes.size());
    std::vector<std::vector<PersonInstance>> gts_per_image(scenes.size());
    double loc = 0.0;
    for (size_t si = 0; si < scenes.size(); ++si) {
      preds_per_image[si] = poses[vi * scenes.size() + si];
      gts_per_image[si] = scenes[si].persons;
      loc += loc_mean[vi * scenes.size() + si];
    }
    const APReport rep = average_precision(preds_per_image, gts_per_image,
                                           uniform_oks_params(K));
    SweepRow row;
    row.param = param;
    row.value = values[vi];
    row.mean_loc_err_px = loc / double(scenes.size());
    row.ap = rep.ap;
    row.ap_m = rep.ap_m;
    row.ap_l = rep.ap_l;
    row.seed_count = int(scenes.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "param,value,mean_loc_err_px,ap,ap_m,ap_l,seed_count\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%d",
                  r.mean_loc_err_px, r.ap, r.ap_m, r.ap_l, r.seed_count);
    os << r.param << "," << r.value << "," << buf << "\n";
  }
  return os.str();
}

}  // namespace swahr
