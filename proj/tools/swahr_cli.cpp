#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "swahr/annotations.hpp"
#include "swahr/decoder.hpp"
#include "swahr/evaluator.hpp"
#include "swahr/heatmap.hpp"
#include "swahr/io.hpp"
#include "swahr/losses.hpp"
#include "swahr/optimizer.hpp"
#include "swahr/synth.hpp"

namespace {

using swahr::StackShape;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CLI::ValidationError(what, "cannot parse '" + s + "' as a number");
  }
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CLI::ValidationError(what, "cannot parse '" + s + "' as an integer");
  }
}

// Registers every parameter both as a CLI11 option and as a config-file
// key, so `--config file` can fill anything not given on the command line.
// Config files are flat key=value lines; '#' starts a comment.
class KeyedOptions {
 public:
  explicit KeyedOptions(CLI::App* cmd) : cmd_(cmd) {}

  CLI::Option* add_double(const std::string& key, double& var,
                          const std::string& desc) {
    setters_[key] = [&var, key](const std::string& text) {
      var = parse_double(text, "config key " + key);
    };
    return cmd_->add_option("--" + key, var, desc);
  }

  CLI::Option* add_float(const std::string& key, float& var,
                         const std::string& desc) {
    setters_[key] = [&var, key](const std::string& text) {
      var = float(parse_double(text, "config key " + key));
    };
    return cmd_->add_option("--" + key, var, desc);
  }

  CLI::Option* add_int(const std::string& key, int& var,
                       const std::string& desc) {
    setters_[key] = [&var, key](const std::string& text) {
      var = int(parse_long(text, "config key " + key));
    };
    return cmd_->add_option("--" + key, var, desc);
  }

  CLI::Option* add_seed(const std::string& key, uint64_t& var,
                        const std::string& desc) {
    setters_[key] = [&var, key](const std::string& text) {
      var = uint64_t(parse_long(text, "config key " + key));
    };
    return cmd_->add_option("--" + key, var, desc);
  }

  CLI::Option* add_string(const std::string& key, std::string& var,
                          const std::string& desc) {
    setters_[key] = [&var](const std::string& text) { var = text; };
    return cmd_->add_option("--" + key, var, desc);
  }

  void apply_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
      throw std::runtime_error("config: cannot open " + path);
    }
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw CLI::ValidationError(
            "config", path + ":" + std::to_string(lineno) +
                          ": expected key=value, got '" + line + "'");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      auto it = setters_.find(key);
      if (it == setters_.end()) {
        std::string valid;
        for (const auto& [k, fn] : setters_) {
          if (!valid.empty()) valid += ", ";
          valid += k;
        }
        throw CLI::ValidationError("config", "unknown key '" + key +
                                                 "' (valid keys: " + valid +
                                                 ")");
      }
      CLI::Option* opt = cmd_->get_option_no_throw("--" + key);
      if (opt != nullptr && opt->count() > 0) continue;  // flag wins
      it->second(value);
    }
  }

 private:
  CLI::App* cmd_;
  std::map<std::string, std::function<void(const std::string&)>> setters_;
};

StackShape parse_size(const std::string& text) {
  const std::vector<std::string> parts = split(text, 'x');
  if (parts.size() != 3) {
    throw CLI::ValidationError("size", "expected KxHxW, got '" + text + "'");
  }
  StackShape s;
  s.channels = int(parse_long(parts[0], "size"));
  s.height = int(parse_long(parts[1], "size"));
  s.width = int(parse_long(parts[2], "size"));
  return s;
}

// scene generator spec: comma-separated key=value with keys n, scales
// (min:max), jitter, canvas (HxW)
swahr::SceneConfig parse_gen_spec(const std::string& text, uint64_t seed) {
  swahr::SceneConfig cfg;
  cfg.seed = seed;
  cfg.n_persons = 2;
  cfg.scale_min = 1.0;
  cfg.scale_max = 2.0;
  cfg.jitter_coeff = 0.0;
  for (const std::string& part : split(text, ',')) {
    if (trim(part).empty()) continue;
    const size_t eq = part.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("gen", "expected key=value, got '" + part +
                                            "'");
    }
    const std::string key = trim(part.substr(0, eq));
    const std::string value = trim(part.substr(eq + 1));
    if (key == "n") {
      cfg.n_persons = int(parse_long(value, "gen n"));
    } else if (key == "scales") {
      const std::vector<std::string> mm = split(value, ':');
      if (mm.size() != 2) {
        throw CLI::ValidationError("gen", "scales must be min:max");
      }
      cfg.scale_min = parse_double(mm[0], "gen scales");
      cfg.scale_max = parse_double(mm[1], "gen scales");
    } else if (key == "jitter") {
      cfg.jitter_coeff = parse_double(value, "gen jitter");
    } else if (key == "canvas") {
      const std::vector<std::string> hw = split(value, 'x');
      if (hw.size() != 2) {
        throw CLI::ValidationError("gen", "canvas must be HxW");
      }
      cfg.height = int(parse_long(hw[0], "gen canvas"));
      cfg.width = int(parse_long(hw[1], "gen canvas"));
    } else {
      throw CLI::ValidationError(
          "gen", "unknown key '" + key + "' (valid: n, scales, jitter, canvas)");
    }
  }
  return cfg;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
  std::vector<std::pair<int, int>> pairs;
  for (const std::string& part : split(text, ',')) {
    if (trim(part).empty()) continue;
    const std::vector<std::string> ab = split(part, ':');
    if (ab.size() != 2) {
      throw CLI::ValidationError("flip-pairs", "expected a:b pairs");
    }
    pairs.emplace_back(int(parse_long(ab[0], "flip-pairs")),
                       int(parse_long(ab[1], "flip-pairs")));
  }
  return pairs;
}

swahr::OksParams resolve_k_consts(const std::string& spec, int channels) {
  if (spec == "coco") {
    if (channels != 17) {
      throw std::invalid_argument(
          "k-consts 'coco' needs 17 keypoints, annotations have " +
          std::to_string(channels));
    }
    return swahr::coco_oks_params();
  }
  if (spec.rfind("uniform:", 0) == 0) {
    const double k = parse_double(spec.substr(8), "k-consts");
    return swahr::uniform_oks_params(channels, k);
  }
  std::ifstream f(spec);
  if (!f) throw std::invalid_argument("k-consts: cannot open " + spec);
  nlohmann::json doc;
  f >> doc;
  if (!doc.is_array() || int(doc.size()) != channels) {
    throw std::invalid_argument("k-consts: expected a JSON array of " +
                                std::to_string(channels) + " numbers");
  }
  swahr::OksParams p;
  p.k_consts = doc.get<std::vector<double>>();
  for (double k : p.k_consts) {
    if (!(k > 0.0)) throw std::invalid_argument("k-consts must be > 0");
  }
  return p;
}

// ---- encode ----------------------------------------------------------

struct EncodeArgs {
  std::string annotations;
  std::string size_text;
  std::string variant = "base";
  std::string out;
  std::string config;
  float sigma0 = 2.0f;
  double scale = 1.0;
  double w_base = 256.0;
};

void run_encode(const EncodeArgs& a) {
  if (a.size_text.empty()) {
    throw CLI::ValidationError("size", "--size KxHxW is required");
  }
  const StackShape shape = parse_size(a.size_text);
  const std::vector<swahr::PersonInstance> persons =
      swahr::load_annotations(a.annotations);
  if (!persons.empty() &&
      int(persons[0].keypoints.size()) != shape.channels) {
    throw std::invalid_argument(
        "encode: annotations have " +
        std::to_string(persons[0].keypoints.size()) +
        " keypoints but --size says " + std::to_string(shape.channels));
  }
  swahr::HeatmapStack stack =
      swahr::encode_gaussian(persons, a.sigma0, shape);
  if (a.variant == "shr") {
    std::vector<double> scales(persons.size());
    for (size_t p = 0; p < persons.size(); ++p) {
      scales[p] =
          swahr::shr_scale_from_bbox(double(persons[p].bbox.w), a.w_base);
    }
    stack = swahr::sahr_exact(
        stack, swahr::rasterize_scale_field(persons, scales, a.sigma0, shape));
  } else if (a.variant == "sahr-fixed") {
    if (!(a.scale > 0.0)) {
      throw std::invalid_argument("encode: --scale must be > 0");
    }
    const swahr::ScaleField s(shape.channels, shape.height, shape.width,
                              float(a.scale));
    stack = swahr::sahr_exact(stack, s);
  } else if (a.variant != "base") {
    throw CLI::ValidationError(
        "variant", "expected base, shr or sahr-fixed, got '" + a.variant + "'");
  }
  swahr::save_tensor(stack, a.out);
}

// ---- loss ------------------------------------------------------------

struct LossArgs {
  std::string pred;
  std::string base;
  std::string alpha;
  std::string variant = "base";
  std::string config;
  double lambda = 1.0;
  double gamma = 0.01;
};

void run_loss(const LossArgs& a) {
  const swahr::HeatmapStack pred = swahr::load_tensor_file(a.pred);
  const swahr::HeatmapStack base = swahr::load_tensor_file(a.base);
  swahr::AlphaField alpha(base.channels(), base.height(), base.width(), 0.0f);
  if (!a.alpha.empty()) alpha = swahr::load_tensor_file(a.alpha);

  const swahr::LossVariant v = swahr::variant_from_name(a.variant);
  swahr::LossReport rep;
  switch (v) {
    case swahr::LossVariant::base:
      rep.regression = swahr::l2_loss(pred, base);
      rep.total = rep.regression;
      rep.element_count = pred.size();
      break;
    case swahr::LossVariant::sahr:
      rep = swahr::total_sahr_loss(pred, base, alpha, a.lambda);
      break;
    case swahr::LossVariant::wahr:
      rep.regression = swahr::wahr_loss(pred, base, a.gamma);
      rep.total = rep.regression;
      rep.gamma = a.gamma;
      rep.element_count = pred.size();
      break;
    case swahr::LossVariant::swahr:
      rep = swahr::swahr_loss(pred, base, alpha, a.lambda, a.gamma);
      break;
    default:
      throw std::invalid_argument(
          "loss: variant must be base, sahr, wahr or swahr");
  }
  nlohmann::json j{{"variant", swahr::variant_name(v)},
                   {"regression", rep.regression},
                   {"regularizer", rep.regularizer},
                   {"total", rep.total},
                   {"lambda", std::isinf(rep.lambda) ? -1.0 : rep.lambda},
                   {"element_count", rep.element_count}};
  if (rep.gamma) j["gamma"] = *rep.gamma;
  std::cout << j.dump(2) << "\n";
}

// ---- train-toy -------------------------------------------------------

struct TrainArgs {
  std::string scene;
  std::string gen;
  std::string variant = "base";
  std::string out;
  std::string config;
  float sigma0 = 2.0f;
  double lambda = 1.0;
  double gamma = 0.01;
  double lr = 0.5;
  int steps = 5000;
  uint64_t seed = 0;
  bool pgm = false;
};

swahr::SyntheticScene resolve_scene(const std::string& scene_path,
                                    const std::string& gen_spec,
                                    uint64_t seed) {
  if (!scene_path.empty() && !gen_spec.empty()) {
    throw CLI::ValidationError("scene", "--scene and --gen are exclusive");
  }
  if (scene_path.empty() && gen_spec.empty()) {
    throw CLI::ValidationError("scene", "need --scene or --gen");
  }
  if (!scene_path.empty()) return swahr::load_scene(scene_path);
  return swahr::generate_scene(parse_gen_spec(gen_spec, seed));
}

void run_train(const TrainArgs& a) {
  const swahr::SyntheticScene scene = resolve_scene(a.scene, a.gen, a.seed);
  swahr::FitConfig cfg;
  cfg.variant = swahr::variant_from_name(a.variant);
  cfg.sigma0 = a.sigma0;
  cfg.lambda = a.lambda;
  cfg.gamma = a.gamma;
  cfg.learning_rate = a.lr;
  cfg.steps = a.steps;
  cfg.seed = a.seed;

  const swahr::FitResult fit = swahr::fit_direct(scene, cfg);

  namespace fs = std::filesystem;
  fs::create_directories(a.out);
  if (a.gen.size()) swahr::save_scene(scene, a.out + "/scene.json");

  std::ofstream curve(a.out + "/loss_curve.csv");
  if (!curve) throw std::runtime_error("cannot write " + a.out);
  curve << "step,regression,regularizer,total\n";
  curve.precision(12);
  for (size_t i = 0; i < fit.loss_curve.size(); ++i) {
    const swahr::LossReport& r = fit.loss_curve[i];
    curve << i << "," << r.regression << "," << r.regularizer << ","
          << r.total << "\n";
  }
  curve.close();

  swahr::save_tensor(fit.final_pred, a.out + "/final_pred.hmap");
  swahr::save_tensor(fit.final_scale, a.out + "/final_scale.hmap");

  nlohmann::json summary = nlohmann::json::array();
  for (const swahr::PersonScaleStat& s : fit.per_person_mean_scale) {
    summary.push_back({{"person", s.person},
                       {"bbox_width", s.bbox_width},
                       {"mean_scale", s.mean_scale}});
  }
  std::ofstream sj(a.out + "/scale_summary.json");
  sj << summary.dump(2) << "\n";
  sj.close();

  if (a.pgm) {
    swahr::save_pgm(fit.final_pred.channel(0), a.out + "/pred_c0.pgm");
    // inverse scale: bright = sharper target (larger 1/s)
    swahr::Grid2D inv = fit.final_scale.channel(0);
    for (float& v : inv.data) v = v > 0.0f ? 1.0f / v : 0.0f;
    swahr::save_pgm(inv, a.out + "/inv_scale_c0.pgm");
  }
}

// ---- sweep -----------------------------------------------------------

struct SweepArgs {
  std::string param;
  std::string values;
  std::string scenes;
  std::string gen;
  std::string variant = "sahr";
  std::string out;
  std::string config;
  float sigma0 = 2.0f;
  double lambda = 1.0;
  double gamma = 0.01;
  double lr = 0.5;
  int steps = 800;
  int seeds = 4;
  uint64_t seed = 0;
};

void run_sweep(const SweepArgs& a) {
  if (a.param.empty() || a.values.empty()) {
    throw CLI::ValidationError("param", "--param and --values are required");
  }
  std::vector<swahr::SyntheticScene> scenes;
  if (!a.scenes.empty() && !a.gen.empty()) {
    throw CLI::ValidationError("scenes", "--scenes and --gen are exclusive");
  }
  if (!a.scenes.empty()) {
    for (const std::string& path : split(a.scenes, ',')) {
      scenes.push_back(swahr::load_scene(trim(path)));
    }
  } else if (!a.gen.empty()) {
    if (a.seeds <= 0) {
      throw CLI::ValidationError("seeds", "--seeds must be > 0");
    }
    for (int i = 0; i < a.seeds; ++i) {
      scenes.push_back(
          swahr::generate_scene(parse_gen_spec(a.gen, a.seed + uint64_t(i))));
    }
  } else {
    throw CLI::ValidationError("scenes", "need --scenes or --gen");
  }

  swahr::FitConfig cfg;
  cfg.variant = swahr::variant_from_name(a.variant);
  cfg.sigma0 = a.sigma0;
  cfg.lambda = a.lambda;
  cfg.gamma = a.gamma;
  cfg.learning_rate = a.lr;
  cfg.steps = a.steps;
  cfg.seed = a.seed;

  std::vector<std::string> values;
  for (const std::string& v : split(a.values, ',')) {
    if (!trim(v).empty()) values.push_back(trim(v));
  }
  const std::vector<swahr::SweepRow> rows =
      swahr::ablation_sweep(scenes, cfg, a.param, values);
  const std::string csv = swahr::sweep_csv(rows);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f << csv;
  }
}

// ---- decode ----------------------------------------------------------

struct DecodeArgs {
  std::string pred;
  std::string tags;
  std::string flipped;
  std::string flip_pairs;
  std::string aggregate;
  std::string out;
  std::string config;
  int max_peaks = 8;
  double score_floor = 0.1;
  double tag_threshold = 1.0;
  int image_id = 0;
};

void run_decode(const DecodeArgs& a) {
  swahr::HeatmapStack pred = swahr::load_tensor_file(a.pred);
  if (!a.flipped.empty()) {
    const swahr::HeatmapStack flipped = swahr::load_tensor_file(a.flipped);
    pred = swahr::flip_merge(pred, flipped, parse_pairs(a.flip_pairs));
  } else if (!a.flip_pairs.empty()) {
    throw CLI::ValidationError("flip-pairs", "--flip-pairs needs --flipped");
  }
  if (!a.aggregate.empty()) {
    std::vector<swahr::HeatmapStack> stacks;
    stacks.push_back(std::move(pred));
    for (const std::string& path : split(a.aggregate, ',')) {
      stacks.push_back(swahr::load_tensor_file(trim(path)));
    }
    pred = swahr::aggregate_heatmaps(stacks, stacks[0].height(),
                                     stacks[0].width());
  }

  std::vector<swahr::Detection> dets =
      swahr::find_peaks(pred, a.max_peaks, a.score_floor);
  for (swahr::Detection& d : dets) d = swahr::refine_subpixel(pred, d);

  std::vector<swahr::PoseGroup> poses;
  const int K = pred.channels();
  if (!a.tags.empty()) {
    const swahr::Tensor3 tag_maps = swahr::load_tensor_file(a.tags);
    dets = swahr::attach_tags(dets, tag_maps);
    poses = swahr::group_by_tags(dets, K, a.tag_threshold);
  } else {
    // no tags: group by per-channel score rank (pose 0 takes every
    // channel's best peak, pose 1 the runners-up, and so on)
    std::vector<std::vector<swahr::Detection>> ranked;
    ranked.resize(size_t(K));
    for (const swahr::Detection& d : dets) {
      ranked[size_t(d.channel)].push_back(d);
    }
    size_t max_rank = 0;
    for (const auto& v : ranked) max_rank = std::max(max_rank, v.size());
    for (size_t r = 0; r < max_rank; ++r) {
      swahr::PoseGroup g;
      g.keypoints.resize(size_t(K));
      double score_sum = 0.0;
      int members = 0;
      for (int k = 0; k < K; ++k) {
        if (r < ranked[size_t(k)].size()) {
          g.keypoints[size_t(k)] = ranked[size_t(k)][r];
          score_sum += ranked[size_t(k)][r].score;
          ++members;
        }
      }
      g.group_score = members > 0 ? score_sum / members : 0.0;
      poses.push_back(std::move(g));
    }
  }
  for (swahr::PoseGroup& p : poses) p.image_id = a.image_id;
  swahr::save_poses(poses, a.out);
}

// ---- eval ------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string k_consts = "uniform:0.1";
  std::string out;
  std::string config;
};

void run_eval(const EvalArgs& a) {
  const std::vector<swahr::PersonInstance> gts =
      swahr::load_annotations(a.gt);
  if (gts.empty()) {
    throw std::invalid_argument("eval: ground-truth file has no annotations");
  }
  const int K = int(gts[0].keypoints.size());
  const std::vector<swahr::PoseGroup> preds = swahr::load_poses(a.pred, K);

  // align per-image lists over the union of image ids
  std::map<int, std::vector<swahr::PersonInstance>> gt_by_img =
      swahr::group_by_image(gts);
  std::map<int, std::vector<swahr::PoseGroup>> pred_by_img;
  for (const swahr::PoseGroup& p : preds) pred_by_img[p.image_id].push_back(p);
  std::map<int, bool> ids;
  for (const auto& [id, v] : gt_by_img) ids[id] = true;
  for (const auto& [id, v] : pred_by_img) ids[id] = true;

  std::vector<std::vector<swahr::PoseGroup>> preds_per_image;
  std::vector<std::vector<swahr::PersonInstance>> gts_per_image;
  for (const auto& [id, unused] : ids) {
    preds_per_image.push_back(pred_by_img.count(id) ? pred_by_img[id]
                                                    : std::vector<swahr::PoseGroup>{});
    gts_per_image.push_back(gt_by_img.count(id)
                                ? gt_by_img[id]
                                : std::vector<swahr::PersonInstance>{});
  }

  const swahr::OksParams params = resolve_k_consts(a.k_consts, K);
  const swahr::APReport rep =
      swahr::average_precision(preds_per_image, gts_per_image, params);
  const std::string json_text = swahr::report_to_json(rep);
  std::cout << json_text;
  std::cerr << swahr::report_table(rep);
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f << json_text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scale- and weight-adaptive heatmap toolkit"};
  app.require_subcommand(1);

  EncodeArgs enc;
  CLI::App* encode = app.add_subcommand(
      "encode", "rasterize annotations into a heatmap stack dump");
  KeyedOptions enc_keys(encode);
  encode->add_option("annotations", enc.annotations, "annotation JSON path")
      ->required();
  enc_keys.add_float("sigma0", enc.sigma0, "gaussian std in pixels");
  enc_keys.add_string("size", enc.size_text, "stack shape KxHxW");
  enc_keys.add_string("variant", enc.variant, "base, shr or sahr-fixed");
  enc_keys.add_double("scale", enc.scale, "uniform scale for sahr-fixed");
  enc_keys.add_double("w-base", enc.w_base, "reference width for shr scales");
  encode->add_option("-o,--out", enc.out, "output dump path")->required();
  encode->add_option("--config", enc.config, "key=value config file");
  encode->callback([&] {
    if (!enc.config.empty()) enc_keys.apply_config(enc.config);
    run_encode(enc);
  });

  LossArgs loss;
  CLI::App* loss_cmd =
      app.add_subcommand("loss", "evaluate a loss variant on saved stacks");
  KeyedOptions loss_keys(loss_cmd);
  loss_cmd->add_option("--pred", loss.pred, "prediction dump")->required();
  loss_cmd->add_option("--base", loss.base, "ground-truth activation dump")
      ->required();
  loss_cmd->add_option("--alpha", loss.alpha,
                       "alpha field dump (defaults to zeros)");
  loss_keys.add_string("variant", loss.variant, "base, sahr, wahr or swahr");
  loss_keys.add_double("lambda", loss.lambda, "regularizer weight; inf allowed");
  loss_keys.add_double("gamma", loss.gamma, "weight sharpness exponent");
  loss_cmd->add_option("--config", loss.config, "key=value config file");
  loss_cmd->callback([&] {
    if (!loss.config.empty()) loss_keys.apply_config(loss.config);
    run_loss(loss);
  });

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand(
      "train-toy", "fit a free prediction to a scene's targets");
  KeyedOptions train_keys(train_cmd);
  train_cmd->add_option("--scene", train.scene, "scene JSON path");
  train_cmd->add_option("--gen", train.gen,
                        "scene spec, e.g. n=2,scales=1:2,jitter=0.05");
  train_keys.add_string("variant", train.variant,
                        "base, shr, sahr, wahr or swahr");
  train_keys.add_float("sigma0", train.sigma0, "gaussian std in pixels");
  train_keys.add_double("lambda", train.lambda,
                        "regularizer weight; inf allowed");
  train_keys.add_double("gamma", train.gamma, "weight sharpness exponent");
  train_keys.add_double("lr", train.lr, "learning rate");
  train_keys.add_int("steps", train.steps, "gradient steps");
  train_keys.add_seed("seed", train.seed, "scene and init seed");
  train_cmd->add_flag("--pgm", train.pgm, "also write PGM snapshots");
  train_cmd->add_option("-o,--out", train.out, "output directory")->required();
  train_cmd->add_option("--config", train.config, "key=value config file");
  train_cmd->callback([&] {
    if (!train.config.empty()) train_keys.apply_config(train.config);
    run_train(train);
  });

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "fit across a parameter grid and tabulate metrics");
  KeyedOptions sweep_keys(sweep_cmd);
  sweep_keys.add_string("param", sweep.param, "lambda, gamma or variant");
  sweep_keys.add_string("values", sweep.values, "comma-separated grid");
  sweep_cmd->add_option("--scenes", sweep.scenes,
                        "comma-separated scene JSON paths");
  sweep_cmd->add_option("--gen", sweep.gen, "scene spec for generated scenes");
  sweep_keys.add_int("seeds", sweep.seeds,
                     "number of generated scenes for --gen");
  sweep_keys.add_string("variant", sweep.variant, "fit variant");
  sweep_keys.add_float("sigma0", sweep.sigma0, "gaussian std in pixels");
  sweep_keys.add_double("lambda", sweep.lambda, "regularizer weight");
  sweep_keys.add_double("gamma", sweep.gamma, "weight sharpness exponent");
  sweep_keys.add_double("lr", sweep.lr, "learning rate");
  sweep_keys.add_int("steps", sweep.steps, "gradient steps per fit");
  sweep_keys.add_seed("seed", sweep.seed, "base seed");
  sweep_cmd->add_option("-o,--out", sweep.out, "CSV path (default stdout)");
  sweep_cmd->add_option("--config", sweep.config, "key=value config file");
  sweep_cmd->callback([&] {
    if (!sweep.config.empty()) sweep_keys.apply_config(sweep.config);
    run_sweep(sweep);
  });

  DecodeArgs dec;
  CLI::App* dec_cmd =
      app.add_subcommand("decode", "extract poses from a heatmap dump");
  KeyedOptions dec_keys(dec_cmd);
  dec_cmd->add_option("--pred", dec.pred, "prediction dump")->required();
  dec_cmd->add_option("--tags", dec.tags, "tag field dump for grouping");
  dec_cmd->add_option("--flipped", dec.flipped,
                      "prediction of the mirrored input");
  dec_cmd->add_option("--flip-pairs", dec.flip_pairs,
                      "channel pairs a:b swapped by the mirror");
  dec_cmd->add_option("--aggregate", dec.aggregate,
                      "extra dumps averaged in at the primary resolution");
  dec_keys.add_int("max-peaks", dec.max_peaks, "peaks kept per channel");
  dec_keys.add_double("score-floor", dec.score_floor, "minimum peak score");
  dec_keys.add_double("tag-threshold", dec.tag_threshold,
                      "max tag distance for joining a group");
  dec_keys.add_int("image-id", dec.image_id, "image id stamped on poses");
  dec_cmd->add_option("-o,--out", dec.out, "pose JSON path")->required();
  dec_cmd->add_option("--config", dec.config, "key=value config file");
  dec_cmd->callback([&] {
    if (!dec.config.empty()) dec_keys.apply_config(dec.config);
    run_decode(dec);
  });

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "score poses against annotations (AP report)");
  KeyedOptions eval_keys(eval_cmd);
  eval_cmd->add_option("--pred", eval.pred, "pose JSON path")->required();
  eval_cmd->add_option("--gt", eval.gt, "annotation JSON path")->required();
  eval_keys.add_string("k-consts", eval.k_consts,
                       "coco, uniform:<k>, or a JSON array file");
  eval_cmd->add_option("-o,--out", eval.out, "also write the JSON report here");
  eval_cmd->add_option("--config", eval.config, "key=value config file");
  eval_cmd->callback([&] {
    if (!eval.config.empty()) eval_keys.apply_config(eval.config);
    run_eval(eval);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
