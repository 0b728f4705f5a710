#include "swahr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "swahr/annotations.hpp"

namespace swahr {

using nlohmann::json;

const std::array<std::pair<float, float>, kTemplateKeypoints>&
skeleton_template() {
  // COCO joint order: nose, eyes, ears, shoulders, elbows, wrists, hips,
  // knees, ankles (left before right). Origin on the hip line.
  static const std::array<std::pair<float, float>, kTemplateKeypoints> t = {{
      {0.00f, -11.25f},   // nose
      {0.75f, -12.00f},   // left eye
      {-0.75f, -12.00f},  // right eye
      {1.50f, -11.50f},   // left ear
      {-1.50f, -11.50f},  // right ear
      {3.75f, -8.75f},    // left shoulder
      {-3.75f, -8.75f},   // right shoulder
      {5.25f, -5.00f},    // left elbow
      {-5.25f, -5.00f},   // right elbow
      {6.00f, -1.25f},    // left wrist
      {-6.00f, -1.25f},   // right wrist
      {2.25f, 0.00f},     // left hip
      {-2.25f, 0.00f},    // right hip
      {2.50f, 5.60f},     // left knee
      {-2.50f, 5.60f},    // right knee
      {2.75f, 11.25f},    // left ankle
      {-2.75f, 11.25f},   // right ankle
  }};
  return t;
}

float template_width() { return 12.0f; }   // wrist to wrist
float template_height() { return 23.25f; }  // eye line to ankles

const std::vector<std::pair<int, int>>& coco_flip_pairs() {
  static const std::vector<std::pair<int, int>> pairs = {
      {1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}, {11, 12}, {13, 14}, {15, 16}};
  return pairs;
}

namespace {
void finish_annotation(PersonInstance& p) {
  p.bbox = keypoint_bbox(p);
  p.area = p.bbox.w * p.bbox.h;
}

PersonInstance place_template(double cx, double cy, double s) {
  PersonInstance p;
  p.keypoints.resize(kTemplateKeypoints);
  const auto& tmpl = skeleton_template();
  for (int k = 0; k < kTemplateKeypoints; ++k) {
    p.keypoints[size_t(k)].x = float(cx + s * double(tmpl[size_t(k)].first));
    p.keypoints[size_t(k)].y = float(cy + s * double(tmpl[size_t(k)].second));
    p.keypoints[size_t(k)].visibility = 2;
  }
  finish_annotation(p);
  return p;
}
}  // namespace

std::vector<PersonInstance> jitter_persons(
    const std::vector<PersonInstance>& persons, double jitter_coeff,
    int height, int width, Rng& rng) {
  if (jitter_coeff < 0.0) {
    throw std::domain_error("jitter coefficient must be >= 0");
  }
  std::vector<PersonInstance> out = persons;
  for (PersonInstance& p : out) {
    const double sigma = jitter_coeff * double(p.bbox.w);
    for (KeypointAnnotation& kp : p.keypoints) {
      if (kp.visibility == 0) continue;
      if (sigma > 0.0) {
        kp.x = float(std::clamp(double(kp.x) + sigma * rng.normal(), 0.0,
                                double(width - 1)));
        kp.y = float(std::clamp(double(kp.y) + sigma * rng.normal(), 0.0,
                                double(height - 1)));
      }
    }
    finish_annotation(p);
  }
  return out;
}

SyntheticScene generate_scene(const SceneConfig& cfg) {
  if (cfg.n_persons < 0) {
    throw std::invalid_argument("scene: n_persons must be >= 0");
  }
  if (!(cfg.scale_min > 0.0) || cfg.scale_max < cfg.scale_min) {
    throw std::invalid_argument("scene: need 0 < scale_min <= scale_max");
  }
  if (cfg.jitter_coeff < 0.0) {
    throw std::invalid_argument("scene: jitter_coeff must be >= 0");
  }
  if (cfg.height < 2 || cfg.width < 2) {
    throw std::invalid_argument("scene: canvas must be at least 2x2");
  }

  SyntheticScene scene;
  scene.height = cfg.height;
  scene.width = cfg.width;
  scene.jitter_coeff = cfg.jitter_coeff;
  scene.seed = cfg.seed;

  Rng rng(cfg.seed);
  const double half_w = double(template_width()) / 2.0;
  const double above = 12.0;   // template extent above the hip line
  const double below = 11.25;  // and below

  struct Placed {
    double cx, cy, bw;
  };
  std::vector<Placed> placed;
  for (int p = 0; p < cfg.n_persons; ++p) {
    const double s = rng.uniform(cfg.scale_min, cfg.scale_max);
    // keep room for the figure and for 3-sigma jitter excursions, so
    // clamping at the canvas edge stays rare
    const double pad = 3.0 * cfg.jitter_coeff * double(template_width()) * s;
    const double x_lo = half_w * s + pad;
    const double x_hi = double(cfg.width - 1) - half_w * s - pad;
    const double y_lo = above * s + pad;
    const double y_hi = double(cfg.height - 1) - below * s - pad;
    if (x_lo > x_hi || y_lo > y_hi) {
      throw std::runtime_error(
          "scene: canvas " + std::to_string(cfg.width) + "x" +
          std::to_string(cfg.height) + " cannot hold a person at scale " +
          std::to_string(s) + "; enlarge the canvas or lower the scales");
    }
    const double bw = double(template_width()) * s;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      const double cx = rng.uniform(x_lo, x_hi);
      const double cy = rng.uniform(y_lo, y_hi);
      ok = true;
      for (const Placed& q : placed) {
        const double d = std::hypot(cx - q.cx, cy - q.cy);
        if (d < 0.5 * (bw + q.bw) / 2.0) {
          ok = false;
          break;
        }
      }
      if (ok) {
        placed.push_back({cx, cy, bw});
        scene.persons.push_back(place_template(cx, cy, s));
        scene.person_scales.push_back(s);
      }
    }
    if (!ok) {
      throw std::runtime_error(
          "scene: placement failed 1000 times for person " +
          std::to_string(p) + "; enlarge the canvas or lower n_persons");
    }
  }
  scene.noisy_persons = jitter_persons(scene.persons, cfg.jitter_coeff,
                                       cfg.height, cfg.width, rng);
  return scene;
}

SyntheticScene augment(const SyntheticScene& scene, double rotation_deg,
                       double scale_min, double scale_max, double translation,
                       bool hflip, uint64_t seed) {
  if (rotation_deg < 0.0 || translation < 0.0) {
    throw std::invalid_argument("augment: ranges must be >= 0");
  }
  if (!(scale_min > 0.0) || scale_max < scale_min) {
    throw std::invalid_argument("augment: need 0 < scale_min <= scale_max");
  }
  Rng rng(seed);
  const double rot = rng.uniform(-rotation_deg, rotation_deg);
  const double sc = rng.uniform(scale_min, scale_max);
  const double tx = rng.uniform(-translation, translation);
  const double ty = rng.uniform(-translation, translation);

  const double cx = double(scene.width - 1) / 2.0;
  const double cy = double(scene.height - 1) / 2.0;
  const double th = rot * 3.14159265358979323846 / 180.0;
  const double c = std::cos(th);
  const double s = std::sin(th);

  auto warp = [&](float x, float y) -> std::pair<float, float> {
    const double dx = double(x) - cx;
    const double dy = double(y) - cy;
    double nx = cx + sc * (c * dx - s * dy) + tx;
    double ny = cy + sc * (s * dx + c * dy) + ty;
    if (hflip) nx = double(scene.width - 1) - nx;
    return {float(nx), float(ny)};
  };

  auto warp_persons = [&](const std::vector<PersonInstance>& persons) {
    std::vector<PersonInstance> out = persons;
    for (PersonInstance& p : out) {
      for (KeypointAnnotation& kp : p.keypoints) {
        if (kp.visibility == 0) continue;
        const auto [nx, ny] = warp(kp.x, kp.y);
        kp.x = nx;
        kp.y = ny;
      }
      if (hflip) {
        if (int(p.keypoints.size()) != kTemplateKeypoints) {
          throw std::invalid_argument(
              "augment: hflip needs the 17-keypoint joint order");
        }
        for (const auto& [a, b] : coco_flip_pairs()) {
          std::swap(p.keypoints[size_t(a)], p.keypoints[size_t(b)]);
        }
      }
      finish_annotation(p);
    }
    return out;
  };

  SyntheticScene out = scene;
  out.persons = warp_persons(scene.persons);
  out.noisy_persons = warp_persons(scene.noisy_persons);
  for (double& ps : out.person_scales) ps *= sc;
  return out;
}

std::string scene_to_json(const SyntheticScene& scene) {
  json noisy = json::parse(annotations_to_json(scene.noisy_persons));
  json exact = json::parse(annotations_to_json(scene.persons));
  json j{{"canvas", {{"height", scene.height}, {"width", scene.width}}},
         {"seed", scene.seed},
         {"jitter_coeff", scene.jitter_coeff},
         {"scales", scene.person_scales},
         {"annotations", noisy["annotations"]},
         {"true_annotations", exact["annotations"]}};
  return j.dump(2) + "\n";
}

SyntheticScene parse_scene(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scene: bad JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("canvas") ||
      !doc.contains("annotations") || !doc.contains("true_annotations")) {
    throw std::invalid_argument(
        "scene: need canvas, annotations and true_annotations");
  }
  SyntheticScene scene;
  scene.height = doc["canvas"].value("height", 0);
  scene.width = doc["canvas"].value("width", 0);
  if (scene.height <= 0 || scene.width <= 0) {
    throw std::invalid_argument("scene: bad canvas shape");
  }
  scene.seed = doc.value("seed", uint64_t(0));
  scene.jitter_coeff = doc.value("jitter_coeff", 0.0);
  const std::string noisy =
      json{{"annotations", doc["annotations"]}}.dump();
  const std::string exact =
      json{{"annotations", doc["true_annotations"]}}.dump();
  scene.noisy_persons = parse_annotations(noisy);
  scene.persons = parse_annotations(exact);
  if (scene.persons.size() != scene.noisy_persons.size()) {
    throw std::invalid_argument(
        "scene: annotations and true_annotations lengths differ");
  }
  if (doc.contains("scales")) {
    scene.person_scales = doc["scales"].get<std::vector<double>>();
    if (scene.person_scales.size() != scene.persons.size()) {
      throw std::invalid_argument("scene: scales length mismatch");
    }
  } else {
    scene.person_scales.assign(scene.persons.size(), 1.0);
  }
  return scene;
}

void save_scene(const SyntheticScene& scene, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open for write: " + path);
  f << scene_to_json(scene);
}

SyntheticScene load_scene(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_scene(buf.str());
}

}  // namespace swahr
