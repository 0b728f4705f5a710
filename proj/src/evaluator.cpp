#include "swahr/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace swahr {

using nlohmann::json;

OksParams uniform_oks_params(int channels, double k) {
  if (channels <= 0) {
    throw std::invalid_argument("oks params: channels must be > 0");
  }
  if (!(k > 0.0)) {
    throw std::invalid_argument("oks params: k must be > 0");
  }
  OksParams p;
  p.k_consts.assign(size_t(channels), k);
  return p;
}

OksParams coco_oks_params() {
  // 2x the published per-keypoint sigmas, matching the reference evaluator
  static const double sigmas[17] = {
      0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
      0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089};
  OksParams p;
  p.k_consts.resize(17);
  for (size_t i = 0; i < 17; ++i) p.k_consts[i] = 2.0 * sigmas[i];
  return p;
}

double oks(const PoseGroup& pred, const PersonInstance& gt,
           const OksParams& params) {
  if (params.k_consts.size() != gt.keypoints.size() ||
      pred.keypoints.size() != gt.keypoints.size()) {
    throw std::invalid_argument("oks: keypoint count mismatch");
  }
  if (!(gt.area > 0.0f)) {
    throw std::domain_error("oks: gt area must be > 0");
  }
  double sum = 0.0;
  size_t labeled = 0;
  for (size_t i = 0; i < gt.keypoints.size(); ++i) {
    const KeypointAnnotation& g = gt.keypoints[i];
    if (g.visibility == 0) continue;
    ++labeled;
    const auto& slot = pred.keypoints[i];
    if (!slot) continue;
    const double dx = slot->x - double(g.x);
    const double dy = slot->y - double(g.y);
    const double k = params.k_consts[i];
    sum += std::exp(-(dx * dx + dy * dy) /
                    (2.0 * double(gt.area) * k * k));
  }
  if (labeled == 0) return 0.0;
  return sum / double(labeled);
}

namespace {
constexpr int kNumThresholds = 10;  // 0.50 : 0.05 : 0.95
constexpr int kRecallPoints = 101;

double threshold_at(int ti) { return 0.5 + 0.05 * ti; }

enum class DetClass : uint8_t { fp, tp, ignored };

struct PooledDet {
  double score;
  int image;
  int index;  // score-descending rank within the image
  DetClass cls;
};

// greedy matches for one image at one threshold; returns per-pred gt index
// or -1. preds are visited strongest first; each takes the unmatched gt
// with the highest similarity, ties to the lower gt index.
std::vector<int> greedy_match(const std::vector<std::vector<double>>& oks_mat,
                              size_t n_gt, double threshold) {
  std::vector<int> pred_to_gt(oks_mat.size(), -1);
  std::vector<bool> taken(n_gt, false);
  for (size_t pi = 0; pi < oks_mat.size(); ++pi) {
    int best = -1;
    double best_oks = 0.0;
    for (size_t gi = 0; gi < n_gt; ++gi) {
      if (taken[gi]) continue;
      const double v = oks_mat[pi][gi];
      if (best < 0 || v > best_oks) {
        best = int(gi);
        best_oks = v;
      }
    }
    if (best >= 0 && best_oks >= threshold) {
      pred_to_gt[pi] = best;
      taken[size_t(best)] = true;
    }
  }
  return pred_to_gt;
}

// 101-point interpolated AP from pooled detections. Returns -1 when the
// split holds no ground truth.
double ap_from_pool(std::vector<PooledDet> pool, size_t gt_total) {
  if (gt_total == 0) return -1.0;
  std::sort(pool.begin(), pool.end(), [](const PooledDet& a,
                                         const PooledDet& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image != b.image) return a.image < b.image;
    return a.index < b.index;
  });
  std::vector<double> precision;
  std::vector<double> recall;
  size_t tp = 0, fp = 0;
  for (const PooledDet& d : pool) {
    if (d.cls == DetClass::ignored) continue;
    if (d.cls == DetClass::tp) ++tp;
    else ++fp;
    precision.push_back(double(tp) / double(tp + fp));
    recall.push_back(double(tp) / double(gt_total));
  }
  // precision envelope: best precision at recall >= r
  for (size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double acc = 0.0;
  size_t j = 0;
  for (int ri = 0; ri < kRecallPoints; ++ri) {
    const double r = double(ri) / (kRecallPoints - 1);
    while (j < recall.size() && recall[j] < r) ++j;
    if (j < precision.size()) acc += precision[j];
  }
  return acc / kRecallPoints;
}
}  // namespace

APReport average_precision(
    const std::vector<std::vector<PoseGroup>>& preds_per_image,
    const std::vector<std::vector<PersonInstance>>& gts_per_image,
    const OksParams& params) {
  if (preds_per_image.size() != gts_per_image.size()) {
    throw std::invalid_argument("average_precision: image count mismatch");
  }
  const size_t n_images = gts_per_image.size();

  APReport rep;
  for (const auto& gts : gts_per_image) rep.gt_count += gts.size();
  for (const auto& preds : preds_per_image) rep.det_count += preds.size();
  if (rep.gt_count == 0) return rep;  // undefined, flagged via valid=false
  rep.valid = true;

  // per image: detections sorted strongest first, oks precomputed
  std::vector<std::vector<int>> order(n_images);
  std::vector<std::vector<std::vector<double>>> oks_mat(n_images);
  for (size_t im = 0; im < n_images; ++im) {
    const auto& preds = preds_per_image[im];
    const auto& gts = gts_per_image[im];
    order[im].resize(preds.size());
    for (size_t i = 0; i < preds.size(); ++i) order[im][i] = int(i);
    std::stable_sort(order[im].begin(), order[im].end(),
                     [&preds](int a, int b) {
                       return preds[size_t(a)].group_score >
                              preds[size_t(b)].group_score;
                     });
    oks_mat[im].assign(preds.size(), std::vector<double>(gts.size(), 0.0));
    for (size_t r = 0; r < preds.size(); ++r) {
      const PoseGroup& p = preds[size_t(order[im][r])];
      for (size_t g = 0; g < gts.size(); ++g) {
        oks_mat[im][r][g] = oks(p, gts[g], params);
      }
    }
  }

  auto area_of = [&](size_t im, int gi) {
    return double(gts_per_image[im][size_t(gi)].area);
  };

  // in_split(area) selects the gts that count for the active metric;
  // detections matched to out-of-split gts are ignored, not penalized
  auto split_ap = [&](auto in_split, int ti, size_t det_cap) {
    std::vector<PooledDet> pool;
    size_t gt_total = 0;
    size_t tp_total = 0;
    for (size_t im = 0; im < n_images; ++im) {
      const auto& gts = gts_per_image[im];
      for (const auto& g : gts) {
        if (in_split(double(g.area))) ++gt_total;
      }
      const size_t n_pred = std::min(order[im].size(), det_cap);
      std::vector<std::vector<double>> mat(oks_mat[im].begin(),
                                           oks_mat[im].begin() + n_pred);
      const std::vector<int> match =
          greedy_match(mat, gts.size(), threshold_at(ti));
      for (size_t r = 0; r < n_pred; ++r) {
        PooledDet d;
        d.score = preds_per_image[im][size_t(order[im][r])].group_score;
        d.image = int(im);
        d.index = int(r);
        if (match[r] < 0) {
          d.cls = DetClass::fp;
        } else if (in_split(area_of(im, match[r]))) {
          d.cls = DetClass::tp;
          ++tp_total;
        } else {
          d.cls = DetClass::ignored;
        }
        pool.push_back(d);
      }
    }
    return std::pair<double, double>(
        ap_from_pool(std::move(pool), gt_total),
        gt_total > 0 ? double(tp_total) / double(gt_total) : -1.0);
  };

  auto all = [](double) { return true; };
  auto medium = [&](double a) {
    return a > params.medium_min && a <= params.medium_max;
  };
  auto large = [&](double a) { return a > params.medium_max; };
  const size_t no_cap = size_t(-1);

  double ap_sum = 0.0, apm_sum = 0.0, apl_sum = 0.0, ar_sum = 0.0;
  bool any_m = false, any_l = false;
  for (int ti = 0; ti < kNumThresholds; ++ti) {
    const auto [ap_t, rec_t] = split_ap(all, ti, no_cap);
    ap_sum += ap_t;
    if (ti == 0) rep.ap50 = ap_t;  // t = 0.50
    if (ti == 5) rep.ap75 = ap_t;  // t = 0.75
    const auto [apm_t, rm] = split_ap(medium, ti, no_cap);
    if (apm_t >= 0.0) {
      apm_sum += apm_t;
      any_m = true;
    }
    const auto [apl_t, rl] = split_ap(large, ti, no_cap);
    if (apl_t >= 0.0) {
      apl_sum += apl_t;
      any_l = true;
    }
    const auto [ap20_t, rec20_t] = split_ap(all, ti, 20);
    ar_sum += rec20_t;
    (void)rm;
    (void)rl;
    (void)ap20_t;
  }
  rep.ap = ap_sum / kNumThresholds;
  rep.ap_m = any_m ? apm_sum / kNumThresholds : -1.0;
  rep.ap_l = any_l ? apl_sum / kNumThresholds : -1.0;
  rep.ar20 = ar_sum / kNumThresholds;
  return rep;
}

std::string report_to_json(const APReport& r) {
  json j{{"valid", r.valid},   {"ap", r.ap},           {"ap50", r.ap50},
         {"ap75", r.ap75},     {"ap_m", r.ap_m},       {"ap_l", r.ap_l},
         {"ar20", r.ar20},     {"gt_count", r.gt_count},
         {"det_count", r.det_count}};
  return j.dump(2) + "\n";
}

std::string report_table(const APReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%8s%8s%8s%8s%8s%8s\n%8.3f%8.3f%8.3f%8.3f%8.3f%8.3f\n", "AP",
                "AP50", "AP75", "AP_M", "AP_L", "AR@20", r.ap, r.ap50, r.ap75,
                r.ap_m, r.ap_l, r.ar20);
  return std::string(buf);
}

}  // namespace swahr
