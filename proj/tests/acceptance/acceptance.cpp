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

// Runs the ten acceptance criteria and prints one PASS/FAIL line each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "trifuse/events.hpp"
#include "trifuse/grid.hpp"
#include "trifuse/kernels.hpp"
#include "trifuse/manifest.hpp"
#include "trifuse/model.hpp"
#include "trifuse/npy.hpp"
#include "trifuse/preprocess.hpp"
#include "trifuse/synth.hpp"

using namespace trifuse;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

const std::array<Shape4, 4> kB1Stages{{{1, 64, 80, 104}, {1, 128, 40, 52}, {1, 320, 20, 26}, {1, 512, 10, 13}}};
const std::array<Shape4, 5> kPyramid{
    {{1, 256, 80, 104}, {1, 256, 40, 52}, {1, 256, 20, 26}, {1, 256, 10, 13}, {1, 256, 5, 7}}};

ParamStore block_params(int64_t c, uint64_t seed) {
  ParamSpecList specs;
  specs.norm("blk.norm1", c);
  specs.linear("blk.attn.q", c, c);
  specs.linear("blk.attn.kv", c, 2 * c);
  specs.linear("blk.attn.proj", c, c);
  auto p = ParamStore::build(specs, seed);
  std::mt19937_64 gen(seed);
  oracle::randomize(p, gen, 0.4);
  return p;
}

ParamStore fusion_store(const FusionConfig& cfg, int stage, int64_t c, uint64_t seed) {
  ParamSpecList specs;
  declare_fusion_params(specs, cfg, stage, c);
  auto p = ParamStore::build(specs, seed);
  std::mt19937_64 gen(seed);
  oracle::randomize(p, gen, 0.3);
  return p;
}

// 1. Stage and pyramid shapes for every mechanism and placement subset.
Outcome shape_contract() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(1);
  const Tensor4 x = oracle::random_tensor(gen, 1, 5, 320, 416);
  int configs = 0, deviations = 0;
  auto check = [&](const ModelConfig& m, const ParamStore& params) {
    const auto out = run_model(m, params, x);
    bool ok = true;
    for (size_t i = 0; i < 4; ++i) ok = ok && out.backbone.stages[i].map.shape() == kB1Stages[i];
    for (size_t i = 0; i < 5; ++i) ok = ok && out.pyramid.levels[i].shape() == kPyramid[i];
    if (!ok) {
      ++deviations;
      o.require(false, std::string(to_string(m.fusion.mechanism)) + " " + m.fusion.stages.str() + " deviates");
    }
  };
  for (auto mech : {Mechanism::kMageBite, Mechanism::kMageOnly, Mechanism::kBiteOnly, Mechanism::kCssa,
                    Mechanism::kGaff}) {
    // One store holds the fusion weights for all four stages; each subset
    // reads only the stages it fuses.
    ModelConfig m;
    m.fusion.mechanism = mech;
    const ParamStore params = init_params(m, 7);
    for (const auto& subset : StageSet::every_subset()) {
      m.fusion.stages = subset;
      check(m, params);
      ++configs;
    }
  }
  const double elapsed = seconds_since(t0);
  ModelConfig none;
  none.fusion.mechanism = Mechanism::kNone;
  check(none, init_params(none, 7));
  o.require(configs == 80, "expected 80 configurations");
  o.require(elapsed < 300.0, "took " + fmt(elapsed) + " s");
  if (o.pass) {
    o.detail = std::to_string(configs) + " configs + none, " + std::to_string(deviations) + " deviations, " +
               fmt(elapsed, 4) + " s";
  }
  return o;
}

// 2. MAGE gate identities at the B1 stage shapes.
Outcome mage_identity() {
  Outcome o;
  FusionConfig cfg;
  cfg.mechanism = Mechanism::kMageBite;
  double worst = 0.0;
  for (uint64_t seed = 0; seed < 3; ++seed) {
    for (int stage = 1; stage <= 4; ++stage) {
      const Shape4 s = kB1Stages[static_cast<size_t>(stage - 1)];
      std::mt19937_64 gen(seed * 10 + static_cast<uint64_t>(stage));
      const auto p = fusion_store(cfg, stage, s.c, seed);
      const Tensor4 a = oracle::random_tensor(gen, 1, s.c, s.h, s.w, -3.0, 3.0);
      const Tensor4 b = oracle::random_tensor(gen, 1, s.c, s.h, s.w, -3.0, 3.0);
      FusionOptions zero;
      zero.gates.spatial = 0.0f;
      const auto pass = mage(a, b, p, fusion_prefix(stage), zero);
      o.require(bitwise_equal(pass.rgb, a) && bitwise_equal(pass.te, b), "zero spatial gate altered stage " +
                                                                              std::to_string(stage));
      FusionOptions unit;
      unit.gates.spatial = 1.0f;
      unit.gates.channel = 1.0f;
      const auto sum = mage(a, b, p, fusion_prefix(stage), unit);
      for (size_t i = 0; i < a.values().size(); ++i) {
        const float want_rgb = a.values()[i] + b.values()[i];
        const float want_te = b.values()[i] + a.values()[i];
        worst = std::max({worst, static_cast<double>(std::abs(sum.rgb.values()[i] - want_rgb)),
                          static_cast<double>(std::abs(sum.te.values()[i] - want_te))});
      }
    }
  }
  o.require(worst == 0.0, "unit gates: max abs " + fmt(worst));
  if (o.pass) o.detail = "bitwise pass-through; unit-gate residual max abs 0 at 4 stages x 3 seeds";
  return o;
}

// 3. BiTE and SRA (reduction 1) against brute-force attention.
Outcome attention_oracles() {
  Outcome o;
  double worst_sra = 0.0, worst_bite = 0.0;
  FusionConfig bite_cfg;
  bite_cfg.mechanism = Mechanism::kBiteOnly;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 gen(1000 + seed);
    const int64_t heads = std::uniform_int_distribution<int64_t>(1, 4)(gen);
    const int64_t c = heads * std::uniform_int_distribution<int64_t>(1, 32 / heads)(gen);
    const int64_t h = std::uniform_int_distribution<int64_t>(1, 8)(gen);
    const int64_t w = std::uniform_int_distribution<int64_t>(1, 64 / h)(gen);
    const Tensor4 x = oracle::random_tensor(gen, 1, c, h, w);
    const auto p = block_params(c, seed);
    const auto got = sra_attention(to_tokens(x), h, w, heads, 1, p, "blk.");
    const auto want = oracle::sra_attention(x, heads, 1, p, "blk.");
    for (size_t n = 0; n < want.size(); ++n) {
      for (size_t k = 0; k < want[n].size(); ++k) {
        worst_sra = std::max(worst_sra, std::abs(got.at(0, static_cast<int64_t>(n), static_cast<int64_t>(k)) - want[n][k]));
      }
    }

    const Tensor4 b = oracle::random_tensor(gen, 1, c, h, w);
    const auto fp = fusion_store(bite_cfg, 1, c, seed);
    const auto z = bite_exchange(x, b, fp, fusion_prefix(1));
    const auto zw = oracle::bite_exchange(x, b, fp, fusion_prefix(1));
    for (size_t n = 0; n < zw.size(); ++n) {
      for (size_t k = 0; k < zw[n].size(); ++k) {
        worst_bite = std::max(worst_bite, std::abs(z.at(0, static_cast<int64_t>(n), static_cast<int64_t>(k)) - zw[n][k]));
      }
    }
  }
  o.require(worst_sra < 1e-5, "SRA max abs " + fmt(worst_sra));
  o.require(worst_bite < 1e-5, "BiTE max abs " + fmt(worst_bite));
  if (o.pass) o.detail = "20 seeds; max abs SRA " + fmt(worst_sra) + ", BiTE " + fmt(worst_bite);
  return o;
}

// 4. CSSA swap sets are nested in tau with the stated extremes.
Outcome cssa_threshold() {
  Outcome o;
  const std::array<double, 3> taus{0.3, 0.5, 0.7};
  for (uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(seed);
    const int64_t c = std::uniform_int_distribution<int64_t>(1, 64)(gen);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<float> scores(static_cast<size_t>(c));
    for (auto& s : scores) s = u(gen);
    const auto none = swap_mask(scores, 0.0);
    const auto all = swap_mask(scores, 1.0);
    o.require(std::ranges::none_of(none, [](bool b) { return b; }), "tau=0 swapped a channel");
    o.require(std::ranges::all_of(all, [](bool b) { return b; }), "tau=1 kept a channel");
    std::vector<bool> prev = none;
    for (double tau : taus) {
      const auto m = swap_mask(scores, tau);
      for (size_t i = 0; i < m.size(); ++i) o.require(!prev[i] || m[i], "swap sets not nested at tau " + fmt(tau));
      prev = m;
    }
    // The mask drives which planes are actually replaced.
    const Tensor4 a = oracle::random_tensor(gen, 1, c, 2, 3), b = oracle::random_tensor(gen, 1, c, 2, 3);
    const Tensor4 sw = switch_channels(a, b, Matrix(1, c, scores), 0.5);
    const auto mask = swap_mask(scores, 0.5);
    for (int64_t k = 0; k < c; ++k) {
      const Tensor4& src = mask[static_cast<size_t>(k)] ? b : a;
      o.require(bitwise_equal(slice_channels(sw, k, k + 1), slice_channels(src, k, k + 1)), "switch disagrees with mask");
    }
  }
  if (o.pass) o.detail = "100 score vectors; nested over {0.3, 0.5, 0.7}; tau=0 none, tau=1 all";
  return o;
}

// 5. The eight GAFF variants build, run and count as predicted.
Outcome gaff_variants() {
  Outcome o;
  std::mt19937_64 gen(5);
  const Tensor4 x = oracle::random_tensor(gen, 1, 5, 320, 416);
  std::map<std::tuple<int, Merge, Guidance>, int64_t> counts;
  std::set<int64_t> distinct;
  for (int se : {4, 8}) {
    for (auto merge : {Merge::kDirect, Merge::kBottleneck}) {
      for (auto guidance : {Guidance::kShared, Guidance::kSeparate}) {
        ModelConfig m;
        m.fusion.mechanism = Mechanism::kGaff;
        m.fusion.stages = StageSet::parse("s34");
        m.fusion.se_ratio = se;
        m.fusion.merge = merge;
        m.fusion.guidance = guidance;
        const auto params = init_params(m, 11);
        const auto out = run_model(m, params, x);
        for (size_t i = 0; i < 4; ++i) o.require(out.backbone.stages[i].map.shape() == kB1Stages[i], "stage shape");
        o.require(out.backbone.diagnostics.size() == 2, "expected two fused stages");
        const int64_t got = count_params(m).fusion;
        const int64_t want = oracle::fusion_params(m.fusion, 320) + oracle::fusion_params(m.fusion, 512);
        o.require(got == want, "count " + std::to_string(got) + " != closed form " + std::to_string(want));
        o.require(params.total() == count_params(m).total(), "store size disagrees with count");
        counts[{se, merge, guidance}] = got;
        distinct.insert(got);
      }
    }
  }
  for (int se : {4, 8}) {
    for (auto merge : {Merge::kDirect, Merge::kBottleneck}) {
      o.require(counts[{se, merge, Guidance::kShared}] < counts[{se, merge, Guidance::kSeparate}],
                "shared guidance not below separate");
    }
  }
  o.require(distinct.size() == 8, "variant counts are not all distinct");
  if (o.pass) {
    o.detail = "8 variants at s34; fusion params " + std::to_string(*distinct.begin()) + ".." +
               std::to_string(*distinct.rbegin()) + ", all match closed form";
  }
  return o;
}

// 6. Encoder parameter counts grow with capacity.
Outcome parameter_ordering() {
  Outcome o;
  std::vector<int64_t> enc;
  std::string listing;
  for (auto v : {Variant::kB0, Variant::kB1, Variant::kB2, Variant::kB3, Variant::kB4}) {
    ModelConfig m;
    m.backbone = BackboneConfig::preset(v);
    const auto c = count_params(m);
    int64_t want = oracle::stream_params(m.backbone, 3) + oracle::stream_params(m.backbone, 2);
    for (size_t i = 0; i < 4; ++i) want += oracle::fusion_params(m.fusion, m.backbone.widths[i]);
    o.require(c.encoder() == want, std::string(to_string(v)) + " encoder count disagrees with closed form");
    enc.push_back(c.encoder());
    listing += (listing.empty() ? "" : " < ") + fmt(static_cast<double>(c.encoder()) / 1e6, 4) + "M";
  }
  o.require(std::ranges::is_sorted(enc, std::less_equal<>{}) && std::adjacent_find(enc.begin(), enc.end()) == enc.end(),
            "not strictly increasing: " + listing);
  if (o.pass) o.detail = "B0..B4 encoders " + listing;
  return o;
}

// 7. Event binning against the per-pixel scan.
Outcome event_binning() {
  Outcome o;
  std::mt19937_64 gen(77);
  const int64_t h = 24, w = 32;
  const auto ev = oracle::random_events(gen, 1000, h, w, 400000);
  const EventStream s(h, w, ev);
  const EventStream inv = s.inverted();
  int mismatches = 0;
  for (int k = 0; k < 10; ++k) {
    const double center = 0.02 + 0.036 * k;
    const Matrix got = bin_events(s, center);
    const auto want = oracle::bin_events(ev, h, w, center, 1.0 / 30.0);
    const Matrix neg = bin_events(inv, center);
    for (size_t i = 0; i < want.size(); ++i) {
      mismatches += got.values()[i] != static_cast<float>(want[i]);
      o.require(neg.values()[i] == -got.values()[i], "inversion does not negate");
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " pixels differ from the scan");
  o.require(kDefaultEventWindow == 1.0 / 30.0, "default window is not 1/30 s");
  if (o.pass) o.detail = "1000 events x 10 windows exact; inversion exact; default window 1/30 s";
  return o;
}

// 8. NPY, synthetic corpus and padding round trips.
Outcome data_round_trips(const fs::path& out_dir) {
  Outcome o;
  const fs::path dir = out_dir / "roundtrip";
  fs::create_directories(dir);
  std::mt19937_64 gen(8);
  std::vector<float> v = oracle::random_vector(gen, 301 * 391 * 5, 1e3);
  v[0] = -0.0f;
  v[1] = std::numeric_limits<float>::infinity();
  v[2] = std::numeric_limits<float>::denorm_min();
  for (auto order : {npy::ByteOrder::kLittle, npy::ByteOrder::kBig}) {
    npy::write(dir / "a.npy", npy::from_float({301, 391, 5}, v, order));
    const auto back = npy::read(dir / "a.npy").to_float();
    o.require(back.size() == v.size() && std::memcmp(back.data(), v.data(), v.size() * sizeof(float)) == 0,
              "npy round trip is not bitwise");
  }

  SynthSpec spec;
  spec.frames = 6;
  spec.seed = 8;
  const auto synth = cmd_synth(spec, dir / "synth");
  const auto manifest = load_manifest(synth.manifest);
  double worst = 0.0;
  size_t boxes = 0;
  for (size_t i = 0; i < manifest.size(); ++i) {
    const auto frame = load_entry(manifest, i);
    o.require(frame.boxes.size() == synth.boxes[i].size(), "box count changed");
    for (size_t k = 0; k < std::min(frame.boxes.size(), synth.boxes[i].size()); ++k) {
      const auto got = to_pixels(frame.boxes[k], spec.height, spec.width);
      const auto& want = synth.boxes[i][k];
      worst = std::max({worst, std::abs(got.x1 - want.x1), std::abs(got.y1 - want.y1), std::abs(got.x2 - want.x2),
                        std::abs(got.y2 - want.y2)});
      ++boxes;
    }
  }
  o.require(manifest.size() == 6, "manifest lost frames");
  o.require(worst <= 1.0, "label drift " + fmt(worst) + " px");

  const auto padded = pad_to_stride(Tensor4(1, 5, 301, 391, 1.0f));
  o.require(padded.tensor.shape() == Shape4{1, 5, 320, 416}, "pad_to_stride(301x391) = " + padded.tensor.shape().str());
  o.require(padded.original_h == 301 && padded.original_w == 391, "original size not kept");
  if (o.pass) {
    o.detail = "npy bitwise (both byte orders); " + std::to_string(boxes) + " synth boxes within " + fmt(worst) +
               " px; 301x391 -> 320x416";
  }
  return o;
}

// 9. AP against the staircase oracle plus ranking and duplicate properties.
Outcome metrics() {
  Outcome o;
  double worst = 0.0;
  const std::vector<GroundTruth> gts{{"a", {0, 0, 10, 10}, 0}, {"a", {20, 20, 30, 30}, 0}, {"b", {0, 0, 10, 10}, 0}};
  const std::vector<Detection> dets{{"a", {0, 0, 10, 10}, 0.9, 0},
                                    {"a", {50, 50, 60, 60}, 0.8, 0},
                                    {"b", {0, 0, 10, 10}, 0.7, 0},
                                    {"a", {0, 0, 10, 10}, 0.6, 0}};
  worst = std::abs(average_precision(dets, gts, 0.5).ap - 56.0 / 101.0);
  worst = std::max(worst, std::abs(average_precision(dets, gts, 0.5).ap - oracle::average_precision(dets, gts, 0.5)));

  for (uint64_t seed = 0; seed < 50; ++seed) {
    auto f = oracle::random_ap_fixture(seed, 20, 24);
    for (double thr : iou_thresholds()) {
      worst = std::max(worst, std::abs(average_precision(f.dets, f.gts, thr).ap -
                                       oracle::average_precision(f.dets, f.gts, thr)));
    }

    // Ranking invariance: only the score order matters.
    for (size_t i = 0; i < f.dets.size(); ++i) f.dets[i].score = 0.02 + 0.04 * static_cast<double>(i % 24);
    const auto base = average_precision(f.dets, f.gts, 0.5);
    auto shuffled = f.dets;
    std::mt19937_64 gen(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    auto squashed = f.dets;
    for (auto& d : squashed) d.score = d.score * d.score;
    o.require(average_precision(shuffled, f.gts, 0.5).ap == base.ap, "shuffling changed AP");
    o.require(average_precision(squashed, f.gts, 0.5).ap == base.ap, "monotone rescoring changed AP");

    // Exact copies of every ground truth, each duplicated below all
    // originals: every duplicate is a false positive and AP stays 1.
    std::vector<Detection> perfect;
    for (size_t i = 0; i < f.gts.size(); ++i) {
      perfect.push_back({f.gts[i].image_id, f.gts[i].box, 0.5 + 0.01 * static_cast<double>(i), 0});
    }
    for (const auto& g : f.gts) perfect.push_back({g.image_id, g.box, 0.1, 0});
    const auto p = average_precision(perfect, f.gts, 0.5);
    o.require(p.tp == static_cast<int64_t>(f.gts.size()) && p.fp == static_cast<int64_t>(f.gts.size()) && p.ap == 1.0,
              "duplicates of matched detections were not all false positives");

    // Duplicating arbitrary detections never matches a ground truth twice.
    auto dup = f.dets;
    dup.insert(dup.end(), f.dets.begin(), f.dets.end());
    const auto with_dup = average_precision(dup, f.gts, 0.5);
    o.require(with_dup.tp + with_dup.fn == static_cast<int64_t>(f.gts.size()), "a ground truth matched twice");
    worst = std::max(worst, std::abs(with_dup.ap - oracle::average_precision(dup, f.gts, 0.5)));
  }
  o.require(worst <= 1e-9, "AP differs from oracle by " + fmt(worst));
  if (o.pass) o.detail = "hand fixture + 50 random fixtures x 10 thresholds, max diff " + fmt(worst);
  return o;
}

// 10. The full ablation inventory through cmd_grid.
Outcome grid_reproduction(const fs::path& out_dir, int workers) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::map<std::string, size_t> inventory{{"capacity", 5}, {"gaff_placement", 8}, {"gaff_variants", 11},
                                                {"cssa_tau", 21}, {"modalities", 4}, {"components", 3}};
  std::multiset<std::string> expected;
  for (const auto& [name, n] : inventory) {
    const auto cells = SweepSpec::preset(name).cells;
    std::set<std::string> keys;
    for (const auto& c : cells) {
      const auto rc = apply_json(RunConfig{}, c);
      keys.insert(rc.key());
      expected.insert(rc.key());
    }
    o.require(cells.size() == n && keys.size() == n, name + " has " + std::to_string(keys.size()) + " distinct cells");
  }

  const GridResult result = cmd_grid(RunConfig{}, SweepSpec::preset("ablations"), workers);
  write_grid(result, out_dir / "grid");
  const double elapsed = seconds_since(t0);

  std::multiset<std::string> got;
  for (const auto& r : result.reports) {
    got.insert(r.key());
    bool complete = r.ok && r.error.empty() && r.input_shape == Shape4{1, 5, 320, 416} &&
                    r.forward_ms.size() == static_cast<size_t>(r.config.timing_reps) && r.median_ms > 0.0 &&
                    r.params.total() == count_params(r.config.model()).total();
    for (size_t i = 0; i < 4; ++i) {
      const auto& s = r.stage_shapes[i];
      complete = complete && s.b == 1 && s.c == r.config.backbone.widths[i] && s.h == kB1Stages[i].h &&
                 s.w == kB1Stages[i].w;
    }
    for (size_t i = 0; i < 5; ++i) complete = complete && r.pyramid_shapes[i] == kPyramid[i];
    int fused = 0;
    for (int s = 1; s <= 4; ++s) fused += r.config.fusion.fuses_at(s);
    complete = complete && static_cast<int>(r.diagnostics.size()) == fused;
    o.require(complete, "incomplete report for " + r.key() + (r.error.empty() ? "" : ": " + r.error));
  }
  o.require(result.reports.size() == 52 && result.failures == 0,
            std::to_string(result.reports.size()) + " runs, " + std::to_string(result.failures) + " failed");
  o.require(got == expected, "grid keys differ from the configuration inventory");
  o.require(fs::exists(out_dir / "grid" / "grid.csv") && fs::exists(out_dir / "grid" / "grid.json"),
            "grid files not written");
  o.require(elapsed < 1800.0, "took " + fmt(elapsed) + " s");
  if (o.pass) o.detail = "52 runs (5+8+11+21+4+3), 0 failed, " + fmt(elapsed, 4) + " s";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trifuse acceptance suite"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--out", out, "directory for generated artefacts");
  app.add_option("--only", only, "run only these criterion numbers");
  app.add_option("--workers", workers, "parallel grid cells for criterion 10");
  CLI11_PARSE(app, argc, argv);

  const fs::path out_dir(out);
  fs::create_directories(out_dir);
  const std::vector<Criterion> criteria{
      {1, "shape contract over 80 mechanism/placement configs", shape_contract},
      {2, "MAGE gate identities", mage_identity},
      {3, "BiTE and SRA attention oracles", attention_oracles},
      {4, "CSSA threshold semantics", cssa_threshold},
      {5, "GAFF variant parameter counts", gaff_variants},
      {6, "encoder parameter ordering B0..B4", parameter_ordering},
      {7, "event binning", event_binning},
      {8, "data round trips", [&] { return data_round_trips(out_dir); }},
      {9, "detection metrics", metrics},
      {10, "ablation grid reproduction", [&] { return grid_reproduction(out_dir, workers); }},
  };

  json summary = json::array();
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::ranges::find(only, c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    const double secs = seconds_since(t0);
    failed += r.pass ? 0 : 1;
    std::cout << "criterion " << c.id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << c.title << " -- " << r.detail
              << " [" << fmt(secs, 4) << " s]" << std::endl;
    summary.push_back({{"criterion", c.id}, {"title", c.title}, {"pass", r.pass}, {"detail", r.detail},
                       {"seconds", secs}});
  }
  std::ofstream(out_dir / "acceptance.json") << summary.dump(2) << '\n';
  return failed == 0 ? 0 : 1;
}
