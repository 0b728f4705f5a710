#include "swahr/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace swahr {

using nlohmann::json;

namespace {
PersonInstance parse_one(const json& a, size_t index) {
  PersonInstance p;
  if (!a.contains("keypoints") || !a["keypoints"].is_array()) {
    throw std::invalid_argument("annotation " + std::to_string(index) +
                                ": missing keypoints array");
  }
  const auto& kps = a["keypoints"];
  if (kps.size() % 3 != 0) {
    throw std::invalid_argument("annotation " + std::to_string(index) +
                                ": keypoints length " +
                                std::to_string(kps.size()) +
                                " is not a multiple of 3");
  }
  p.keypoints.resize(kps.size() / 3);
  for (size_t i = 0; i < p.keypoints.size(); ++i) {
    p.keypoints[i].x = kps[3 * i].get<float>();
    p.keypoints[i].y = kps[3 * i + 1].get<float>();
    p.keypoints[i].visibility = kps[3 * i + 2].get<int>();
    if (p.keypoints[i].visibility < 0 || p.keypoints[i].visibility > 2) {
      throw std::invalid_argument("annotation " + std::to_string(index) +
                                  ": visibility must be 0, 1 or 2");
    }
  }
  if (a.contains("bbox")) {
    const auto& b = a["bbox"];
    if (!b.is_array() || b.size() != 4) {
      throw std::invalid_argument("annotation " + std::to_string(index) +
                                  ": bbox must be [x, y, w, h]");
    }
    p.bbox = {b[0].get<float>(), b[1].get<float>(), b[2].get<float>(),
              b[3].get<float>()};
  }
  p.area = a.value("area", p.bbox.w * p.bbox.h);
  p.image_id = a.value("image_id", 0);
  return p;
}
}  // namespace

std::vector<PersonInstance> parse_annotations(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("annotations: bad JSON: ") +
                                e.what());
  }
  if (!doc.is_object() || !doc.contains("annotations") ||
      !doc["annotations"].is_array()) {
    throw std::invalid_argument(
        "annotations: expected top-level object with an 'annotations' array");
  }
  std::vector<PersonInstance> out;
  out.reserve(doc["annotations"].size());
  for (size_t i = 0; i < doc["annotations"].size(); ++i) {
    out.push_back(parse_one(doc["annotations"][i], i));
  }
  for (size_t i = 1; i < out.size(); ++i) {
    if (out[i].keypoints.size() != out[0].keypoints.size()) {
      throw std::invalid_argument(
          "annotations: inconsistent keypoint counts (" +
          std::to_string(out[0].keypoints.size()) + " vs " +
          std::to_string(out[i].keypoints.size()) + " at entry " +
          std::to_string(i) + ")");
    }
  }
  return out;
}

std::vector<PersonInstance> load_annotations(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_annotations(buf.str());
}

std::string annotations_to_json(const std::vector<PersonInstance>& persons) {
  json arr = json::array();
  for (const PersonInstance& p : persons) {
    json kps = json::array();
    for (const KeypointAnnotation& kp : p.keypoints) {
      kps.push_back(kp.x);
      kps.push_back(kp.y);
      kps.push_back(kp.visibility);
    }
    arr.push_back({{"image_id", p.image_id},
                   {"keypoints", std::move(kps)},
                   {"bbox", {p.bbox.x, p.bbox.y, p.bbox.w, p.bbox.h}},
                   {"area", p.area}});
  }
  return json{{"annotations", std::move(arr)}}.dump(2) + "\n";
}

void save_annotations(const std::vector<PersonInstance>& persons,
                      const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open for write: " + path);
  f << annotations_to_json(persons);
}

std::map<int, std::vector<PersonInstance>> group_by_image(
    const std::vector<PersonInstance>& persons) {
  std::map<int, std::vector<PersonInstance>> out;
  for (const PersonInstance& p : persons) out[p.image_id].push_back(p);
  return out;
}

BBox keypoint_bbox(const PersonInstance& person) {
  bool any = false;
  float x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  for (const KeypointAnnotation& kp : person.keypoints) {
    if (kp.visibility == 0) continue;
    if (!any) {
      x0 = x1 = kp.x;
      y0 = y1 = kp.y;
      any = true;
    } else {
      x0 = std::min(x0, kp.x);
      x1 = std::max(x1, kp.x);
      y0 = std::min(y0, kp.y);
      y1 = std::max(y1, kp.y);
    }
  }
  if (!any) {
    throw std::invalid_argument("keypoint_bbox: no labeled keypoints");
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace swahr
