#include "swahr/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "swahr/kernels.hpp"

namespace swahr {

using nlohmann::json;

namespace {
bool strict_local_max(const Tensor3& t, int k, int x, int y) {
  const float c = t(k, x, y);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int nx = x + dx;
      const int ny = y + dy;
      if (nx < 0 || nx >= t.width() || ny < 0 || ny >= t.height()) continue;
      if (t(k, nx, ny) >= c) return false;
    }
  }
  return true;
}
}  // namespace

std::vector<Detection> find_peaks(const HeatmapStack& pred,
                                  int max_per_channel, double score_floor) {
  if (max_per_channel < 0) {
    throw std::invalid_argument("find_peaks: max_per_channel must be >= 0");
  }
  const int K = pred.channels();
  std::vector<std::vector<Detection>> per_channel;
  per_channel.resize(size_t(K));
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (int k = 0; k < K; ++k) {
    // (negated score, row-major index) sorts strongest first with ties
    // going to the smaller cell index
    std::vector<std::pair<double, size_t>> found;
    for (int y = 0; y < pred.height(); ++y) {
      for (int x = 0; x < pred.width(); ++x) {
        const float v = pred(k, x, y);
        if (double(v) < score_floor) continue;
        if (!strict_local_max(pred, k, x, y)) continue;
        found.emplace_back(-double(v), size_t(y) * pred.width() + x);
      }
    }
    std::sort(found.begin(), found.end());
    if (int(found.size()) > max_per_channel) {
      found.resize(size_t(max_per_channel));
    }
    std::vector<Detection>& out = per_channel[size_t(k)];
    out.reserve(found.size());
    for (const auto& [neg_score, idx] : found) {
      Detection d;
      d.channel = k;
      d.x = double(idx % size_t(pred.width()));
      d.y = double(idx / size_t(pred.width()));
      d.score = -neg_score;
      out.push_back(d);
    }
  }
  std::vector<Detection> all;
  for (auto& v : per_channel) {
    all.insert(all.end(), v.begin(), v.end());
  }
  return all;
}

Detection refine_subpixel(const HeatmapStack& pred, const Detection& det) {
  Detection out = det;
  const int k = det.channel;
  if (k < 0 || k >= pred.channels()) {
    throw std::out_of_range("refine_subpixel: channel out of range");
  }
  const int cx = int(std::lround(det.x));
  const int cy = int(std::lround(det.y));
  if (cx < 0 || cx >= pred.width() || cy < 0 || cy >= pred.height()) {
    throw std::out_of_range("refine_subpixel: peak cell out of range");
  }
  if (cx > 0 && cx < pred.width() - 1) {
    const float r = pred(k, cx + 1, cy);
    const float l = pred(k, cx - 1, cy);
    if (r > l) out.x += 0.25;
    else if (r < l) out.x -= 0.25;
  }
  if (cy > 0 && cy < pred.height() - 1) {
    const float d = pred(k, cx, cy + 1);
    const float u = pred(k, cx, cy - 1);
    if (d > u) out.y += 0.25;
    else if (d < u) out.y -= 0.25;
  }
  return out;
}

std::vector<Detection> attach_tags(const std::vector<Detection>& dets,
                                   const Tensor3& tag_maps) {
  std::vector<Detection> out = dets;
  for (Detection& d : out) {
    if (d.channel < 0 || d.channel >= tag_maps.channels()) {
      throw std::out_of_range("attach_tags: channel out of range");
    }
    const int cx = std::clamp(int(std::lround(d.x)), 0, tag_maps.width() - 1);
    const int cy = std::clamp(int(std::lround(d.y)), 0, tag_maps.height() - 1);
    d.tag = double(tag_maps(d.channel, cx, cy));
  }
  return out;
}

namespace {
double bilinear_sample(const Tensor3& t, int k, double sx, double sy) {
  const int x0 = int(std::floor(sx));
  const int y0 = int(std::floor(sy));
  const double fx = sx - x0;
  const double fy = sy - y0;
  auto clampx = [&](int v) { return std::clamp(v, 0, t.width() - 1); };
  auto clampy = [&](int v) { return std::clamp(v, 0, t.height() - 1); };
  const double v00 = t(k, clampx(x0), clampy(y0));
  const double v10 = t(k, clampx(x0 + 1), clampy(y0));
  const double v01 = t(k, clampx(x0), clampy(y0 + 1));
  const double v11 = t(k, clampx(x0 + 1), clampy(y0 + 1));
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
         fy * ((1.0 - fx) * v01 + fx * v11);
}
}  // namespace

HeatmapStack aggregate_heatmaps(const std::vector<HeatmapStack>& stacks,
                                int out_height, int out_width) {
  if (stacks.empty()) {
    throw std::invalid_argument("aggregate: no stacks given");
  }
  if (out_height <= 0 || out_width <= 0) {
    throw std::invalid_argument("aggregate: non-positive output shape");
  }
  const int K = stacks[0].channels();
  for (const HeatmapStack& s : stacks) {
    if (s.channels() != K) {
      throw std::invalid_argument("aggregate: channel counts differ");
    }
    if (s.height() <= 0 || s.width() <= 0) {
      throw std::invalid_argument("aggregate: empty input stack");
    }
  }
  HeatmapStack out(K, out_height, out_width);
  const double inv_count = 1.0 / double(stacks.size());
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (int k = 0; k < K; ++k) {
    for (int y = 0; y < out_height; ++y) {
      for (int x = 0; x < out_width; ++x) {
        double acc = 0.0;
        for (const HeatmapStack& s : stacks) {
          // half-pixel-centered mapping between the two grids
          const double sx = (x + 0.5) * double(s.width()) / out_width - 0.5;
          const double sy = (y + 0.5) * double(s.height()) / out_height - 0.5;
          acc += bilinear_sample(s, k, sx, sy);
        }
        out(k, x, y) = float(acc * inv_count);
      }
    }
  }
  return out;
}

HeatmapStack flip_merge(const HeatmapStack& pred,
                        const HeatmapStack& pred_flipped,
                        const std::vector<std::pair<int, int>>& flip_pairs) {
  require_same_shape(pred, pred_flipped);
  const int K = pred.channels();
  std::vector<int> perm;
  perm.resize(size_t(K));
  std::vector<bool> seen(size_t(K), false);
  for (int k = 0; k < K; ++k) perm[size_t(k)] = k;
  for (const auto& [a, b] : flip_pairs) {
    if (a < 0 || a >= K || b < 0 || b >= K) {
      throw std::invalid_argument("flip_merge: pair index out of range");
    }
    if (seen[size_t(a)] || (a != b && seen[size_t(b)])) {
      throw std::invalid_argument("flip_merge: channel appears twice");
    }
    seen[size_t(a)] = seen[size_t(b)] = true;
    perm[size_t(a)] = b;
    perm[size_t(b)] = a;
  }
  HeatmapStack out(K, pred.height(), pred.width());
  const int W = pred.width();
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (int k = 0; k < K; ++k) {
    for (int y = 0; y < pred.height(); ++y) {
      for (int x = 0; x < W; ++x) {
        const double merged =
            0.5 * (double(pred(k, x, y)) +
                   double(pred_flipped(perm[size_t(k)], W - 1 - x, y)));
        out(k, x, y) = float(merged);
      }
    }
  }
  return out;
}

std::vector<PoseGroup> group_by_tags(const std::vector<Detection>& dets,
                                     int channels, double tag_threshold) {
  if (channels <= 0) {
    throw std::invalid_argument("group_by_tags: channels must be > 0");
  }
  if (!(tag_threshold > 0.0)) {
    throw std::invalid_argument("group_by_tags: tag_threshold must be > 0");
  }
  for (const Detection& d : dets) {
    if (!d.tag.has_value()) {
      throw std::invalid_argument("group_by_tags: detection without a tag");
    }
    if (d.channel < 0 || d.channel >= channels) {
      throw std::invalid_argument("group_by_tags: channel out of range");
    }
  }
  std::vector<Detection> ordered = dets;
  std::sort(ordered.begin(), ordered.end(),
            [](const Detection& a, const Detection& b) {
              if (a.channel != b.channel) return a.channel < b.channel;
              if (a.score != b.score) return a.score > b.score;
              if (a.y != b.y) return a.y < b.y;
              return a.x < b.x;
            });

  struct Running {
    PoseGroup group;
    double tag_sum = 0.0;
    int members = 0;
  };
  std::vector<Running> groups;
  for (const Detection& d : ordered) {
    int best = -1;
    double best_dist = 0.0;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      if (groups[gi].group.keypoints[size_t(d.channel)].has_value()) continue;
      const double dist = std::abs(*d.tag - groups[gi].group.group_tag);
      if (best < 0 || dist < best_dist) {
        best = int(gi);
        best_dist = dist;
      }
    }
    if (best >= 0 && best_dist < tag_threshold) {
      Running& r = groups[size_t(best)];
      r.group.keypoints[size_t(d.channel)] = d;
      r.tag_sum += *d.tag;
      r.members += 1;
      r.group.group_tag = r.tag_sum / r.members;
    } else {
      Running r;
      r.group.keypoints.resize(size_t(channels));
      r.group.keypoints[size_t(d.channel)] = d;
      r.group.group_tag = *d.tag;
      r.tag_sum = *d.tag;
      r.members = 1;
      groups.push_back(std::move(r));
    }
  }

  std::vector<PoseGroup> out;
  out.reserve(groups.size());
  for (Running& r : groups) {
    double score_sum = 0.0;
    for (const auto& slot : r.group.keypoints) {
      if (slot) score_sum += slot->score;
    }
    r.group.group_score = r.members > 0 ? score_sum / r.members : 0.0;
    out.push_back(std::move(r.group));
  }
  return out;
}

std::string poses_to_json(const std::vector<PoseGroup>& poses) {
  json arr = json::array();
  for (const PoseGroup& p : poses) {
    json kps = json::array();
    for (const auto& slot : p.keypoints) {
      if (slot) {
        kps.push_back(slot->x);
        kps.push_back(slot->y);
        kps.push_back(slot->score);
      } else {
        kps.push_back(0.0);
        kps.push_back(0.0);
        kps.push_back(0.0);
      }
    }
    arr.push_back({{"image_id", p.image_id},
                   {"keypoints", std::move(kps)},
                   {"score", p.group_score}});
  }
  return arr.dump(2) + "\n";
}

std::vector<PoseGroup> parse_poses(const std::string& json_text,
                                   int channels) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("poses: bad JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw std::invalid_argument("poses: expected a top-level array");
  }
  std::vector<PoseGroup> out;
  out.reserve(doc.size());
  for (size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    if (!e.contains("keypoints") || !e["keypoints"].is_array() ||
        e["keypoints"].size() != size_t(channels) * 3) {
      throw std::invalid_argument("poses: entry " + std::to_string(i) +
                                  " keypoints must hold " +
                                  std::to_string(channels * 3) + " numbers");
    }
    PoseGroup p;
    p.image_id = e.value("image_id", 0);
    p.group_score = e.value("score", 0.0);
    p.keypoints.resize(size_t(channels));
    for (int k = 0; k < channels; ++k) {
      const double x = e["keypoints"][3 * size_t(k)].get<double>();
      const double y = e["keypoints"][3 * size_t(k) + 1].get<double>();
      const double s = e["keypoints"][3 * size_t(k) + 2].get<double>();
      if (s > 0.0) {
        Detection d;
        d.channel = k;
        d.x = x;
        d.y = y;
        d.score = s;
        p.keypoints[size_t(k)] = d;
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

void save_poses(const std::vector<PoseGroup>& poses, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open for write: " + path);
  f << poses_to_json(poses);
}

std::vector<PoseGroup> load_poses(const std::string& path, int channels) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_poses(buf.str(), channels);
}

}  // namespace swahr
