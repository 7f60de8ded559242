// Copyright 2026 The TriFuse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "trifuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "trifuse/errors.hpp"

namespace trifuse {

using json = nlohmann::json;

void GroundTruthSet::add(const GroundTruth& gt) {
  validate_box(gt.box, "ground truth on image " + gt.image_id);
  images.insert(gt.image_id);
  boxes.push_back(gt);
}

std::array<double, kIouThresholds> iou_thresholds() {
  std::array<double, kIouThresholds> t{};
  for (int j = 0; j < kIouThresholds; ++j) t[static_cast<size_t>(j)] = (50 + 5 * j) / 100.0;
  return t;
}

double box_area(const PixelBox& b) { return (b.x2 - b.x1) * (b.y2 - b.y1); }

double iou(const PixelBox& a, const PixelBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (box_area(a) + box_area(b) - inter);
}

void validate_box(const PixelBox& b, const std::string& what) {
  const bool finite = std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) && std::isfinite(b.y2);
  if (!finite || !(b.x2 > b.x1) || !(b.y2 > b.y1)) {
    std::ostringstream os;
    os << what << ": degenerate box [" << b.x1 << ", " << b.y1 << ", " << b.x2 << ", " << b.y2 << "]";
    throw ValidationError(os.str());
  }
}

ApResult average_precision(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                           double iou_thresh) {
  ApResult res;
  std::map<std::string, std::vector<size_t>> gt_by_image;
  for (size_t i = 0; i < gts.size(); ++i) gt_by_image[gts[i].image_id].push_back(i);

  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });

  std::vector<char> taken(gts.size(), 0);
  std::vector<char> is_tp(order.size(), 0);
  for (size_t k = 0; k < order.size(); ++k) {
    const auto& d = dets[order[k]];
    auto it = gt_by_image.find(d.image_id);
    if (it == gt_by_image.end()) continue;
    double best = iou_thresh;
    int64_t match = -1;
    for (size_t g : it->second) {
      if (taken[g]) continue;
      const double v = iou(d.box, gts[g].box);
      if (v >= best && (match < 0 || v > best)) {
        best = v;
        match = static_cast<int64_t>(g);
      }
    }
    if (match >= 0) {
      taken[static_cast<size_t>(match)] = 1;
      is_tp[k] = 1;
    }
  }

  const auto n_gt = static_cast<int64_t>(gts.size());
  for (char t : is_tp) (t ? res.tp : res.fp) += 1;
  res.fn = n_gt - res.tp;
  if (n_gt == 0) {
    res.flagged = true;
    return res;
  }

  const size_t n = order.size();
  std::vector<double> recall(n), precision(n);
  int64_t tp = 0, fp = 0;
  for (size_t k = 0; k < n; ++k) {
    (is_tp[k] ? tp : fp) += 1;
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gt);
    precision[k] = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  for (size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  double sum = 0.0;
  for (int j = 0; j < kRecallPoints; ++j) {
    const double r = j / 100.0;
    auto pos = std::lower_bound(recall.begin(), recall.end(), r);
    if (pos != recall.end()) sum += precision[static_cast<size_t>(pos - recall.begin())];
  }
  res.ap = sum / kRecallPoints;
  return res;
}

EvalReport evaluate(const std::vector<Detection>& dets, const GroundTruthSet& gts) {
  for (size_t i = 0; i < dets.size(); ++i) {
    if (!gts.images.contains(dets[i].image_id)) {
      throw ValidationError("detection " + std::to_string(i) + " refers to image '" + dets[i].image_id +
                            "' which is not in the ground truth");
    }
  }
  EvalReport rep;
  const auto thresholds = iou_thresholds();
  double sum = 0.0;
  for (size_t j = 0; j < thresholds.size(); ++j) {
    const auto r = average_precision(dets, gts.boxes, thresholds[j]);
    rep.ap[j] = r.ap;
    rep.flagged = rep.flagged || r.flagged;
    sum += r.ap;
    if (j == 0) {
      rep.tp50 = r.tp;
      rep.fp50 = r.fp;
      rep.fn50 = r.fn;
    }
  }
  rep.map = sum / static_cast<double>(thresholds.size());
  rep.map50 = rep.ap[0];
  return rep;
}

namespace {

std::string where(const std::string& source, size_t line) { return source + ":" + std::to_string(line); }

std::string image_id_of(const json& rec, const std::string& loc) {
  if (!rec.contains("image_id")) throw FormatError(loc + ": missing image_id");
  const auto& id = rec["image_id"];
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<int64_t>());
  throw FormatError(loc + ": image_id must be a string or integer");
}

PixelBox box_of(const json& bbox, const std::string& loc) {
  if (!bbox.is_array() || bbox.size() != 4) throw FormatError(loc + ": bbox must be [x1, y1, x2, y2]");
  for (const auto& v : bbox) {
    if (!v.is_number()) throw FormatError(loc + ": bbox entries must be numbers");
  }
  PixelBox b{bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(), bbox[3].get<double>()};
  validate_box(b, loc);
  return b;
}

int class_of(const json& rec, const std::string& loc) {
  if (!rec.contains("class")) return 0;
  if (!rec["class"].is_number_integer()) throw FormatError(loc + ": class must be an integer");
  const int c = rec["class"].get<int>();
  if (c != 0) throw ValidationError(loc + ": class " + std::to_string(c) + " is not the single supported class 0");
  return c;
}

template <typename Fn>
void for_each_record(const std::string& text, const std::string& source, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string loc = where(source, lineno);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(loc + ": malformed JSON record (" + e.what() + ")");
    }
    if (!rec.is_object()) throw FormatError(loc + ": record must be a JSON object");
    fn(rec, loc);
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json box_json(const PixelBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

}  // namespace

std::vector<Detection> parse_detections(const std::string& text, const std::string& source) {
  std::vector<Detection> out;
  for_each_record(text, source, [&](const json& rec, const std::string& loc) {
    Detection d;
    d.image_id = image_id_of(rec, loc);
    if (!rec.contains("bbox")) throw FormatError(loc + ": missing bbox");
    d.box = box_of(rec["bbox"], loc);
    if (!rec.contains("score") || !rec["score"].is_number()) throw FormatError(loc + ": missing numeric score");
    d.score = rec["score"].get<double>();
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw ValidationError(loc + ": score outside [0, 1]");
    d.class_id = class_of(rec, loc);
    out.push_back(d);
  });
  return out;
}

GroundTruthSet parse_ground_truth(const std::string& text, const std::string& source) {
  GroundTruthSet out;
  for_each_record(text, source, [&](const json& rec, const std::string& loc) {
    const std::string id = image_id_of(rec, loc);
    out.add_image(id);
    if (!rec.contains("bbox") || rec["bbox"].is_null() || (rec["bbox"].is_array() && rec["bbox"].empty())) return;
    out.add(GroundTruth{id, box_of(rec["bbox"], loc), class_of(rec, loc)});
  });
  return out;
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
  return parse_detections(slurp(path), path.string());
}

GroundTruthSet read_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(slurp(path), path.string());
}

std::string format_detections(const std::vector<Detection>& dets) {
  std::string out;
  for (const auto& d : dets) {
    json rec{{"image_id", d.image_id}, {"bbox", box_json(d.box)}, {"score", d.score}, {"class", d.class_id}};
    out += rec.dump() + "\n";
  }
  return out;
}

std::string format_ground_truth(const GroundTruthSet& gts) {
  std::string out;
  std::set<std::string> with_boxes;
  for (const auto& g : gts.boxes) {
    json rec{{"image_id", g.image_id}, {"bbox", box_json(g.box)}, {"class", g.class_id}};
    out += rec.dump() + "\n";
    with_boxes.insert(g.image_id);
  }
  for (const auto& id : gts.images) {
    if (!with_boxes.contains(id)) out += json{{"image_id", id}, {"bbox", nullptr}}.dump() + "\n";
  }
  return out;
}

}  // namespace trifuse
