// Copyright 2026 The novelbox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "novelbox/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "novelbox/errors.hpp"

namespace novelbox::pipeline {

namespace {

using nlohmann::json;

cost::AnchorRange make_anchor(const std::string& cls, geom::Point3 lo, geom::Point3 hi) {
  return {cls, lo, hi};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

geom::Point3 read_dims(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(what + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void read_into(const json& obj, const char* key, T& field) {
  if (obj.contains(key) && !obj.at(key).is_null()) field = obj.at(key).get<T>();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::map<std::string, cost::AnchorRange> default_anchors() {
  std::map<std::string, cost::AnchorRange> a;
  const auto add = [&a](const std::string& cls, geom::Point3 lo, geom::Point3 hi) {
    a.emplace(cls, make_anchor(cls, lo, hi));
  };
  add("car", {3.9, 1.6, 1.4}, {5.3, 2.1, 1.9});
  add("truck", {5.5, 2.0, 2.3}, {10.0, 2.9, 3.8});
  add("bus", {9.0, 2.5, 2.9}, {13.0, 3.1, 4.0});
  add("construction_vehicle", {4.5, 2.2, 2.4}, {8.0, 3.2, 3.8});
  add("pedestrian", {0.4, 0.4, 1.4}, {0.95, 0.95, 2.0});
  add("bicycle", {1.4, 0.45, 0.9}, {1.95, 0.8, 1.5});
  add("motorcycle", {1.7, 0.6, 1.1}, {2.5, 1.0, 1.6});
  add("traffic_cone", {0.3, 0.3, 0.6}, {0.55, 0.55, 1.1});
  add("barrier", {1.5, 0.35, 0.8}, {2.8, 0.7, 1.2});
  return a;
}

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.anchors = default_anchors();
  c.filters = align::FilterThresholds::defaults();
  return c;
}

void PipelineConfig::validate() const {
  weights.validate();
  swarm.validate();
  filters.validate();
  for (const auto& [cls, anchor] : anchors) {
    anchor.validate();
    if (!filters.tau_occ.contains(cls)) {
      throw ValidationError("class '" + cls + "' has an anchor but no tau_occ");
    }
  }
  for (const auto& [cls, tau] : filters.tau_occ) {
    if (!anchors.contains(cls)) throw ValidationError("class '" + cls + "' has tau_occ but no anchor");
  }
  if (!(association.tau_match > 0.0)) throw ValidationError("tau_match must be positive");
  if (!(association.d_min >= 0.0 && association.d_min < association.d_max)) {
    throw ValidationError("association requires 0 <= d_min < d_max");
  }
  if (!(clustering.eps > 0.0) || clustering.min_pts < 1) {
    throw ValidationError("clustering requires eps > 0 and min_pts >= 1");
  }
  if (!(clustering.ground.cell_size > 0.0) || !(clustering.ground.height_threshold > 0.0)) {
    throw ValidationError("ground removal requires positive cell size and height threshold");
  }
  const auto& g = clustering.ground;
  if (!(g.seed_quantile > 0.0 && g.seed_quantile <= 1.0) || g.refit_rounds < 0 || !(g.max_slope > 0.0)) {
    throw ValidationError("ground removal requires seed_quantile in (0, 1], refit_rounds >= 0, max_slope > 0");
  }
  if (!(nms_iou > 0.0 && nms_iou < 1.0)) throw ValidationError("nms_iou must lie in (0, 1)");
  if (threads < 0) throw ValidationError("threads must be >= 0");
  if (bench.instances < 1 || bench.budgets.empty()) {
    throw ValidationError("bench needs at least one instance and one budget");
  }
  for (const auto b : bench.budgets) {
    if (b < static_cast<std::size_t>(swarm.n_swarm)) {
      throw ValidationError("bench budgets must be at least the swarm size");
    }
  }
  if (!(bench.range_min > 0.0 && bench.range_min < bench.range_max)) {
    throw ValidationError("bench range must satisfy 0 < min < max");
  }
}

const cost::AnchorRange& PipelineConfig::anchor(const std::string& class_id) const {
  const auto it = anchors.find(class_id);
  if (it == anchors.end()) throw ValidationError("no anchor for class '" + class_id + "'");
  return it->second;
}

std::string PipelineConfig::fingerprint() const {
  // FNV-1a over the canonical JSON dump. The thread count never changes
  // results, so it is left out.
  json j = config_to_json(*this, false);
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return hex64(h);
}

PipelineConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  PipelineConfig c = PipelineConfig::defaults();
  try {
    if (!j.is_object()) throw ValidationError("config root must be an object");
    read_into(j, "seed", c.seed);
    read_into(j, "threads", c.threads);
    read_into(j, "nms_iou", c.nms_iou);

    if (j.contains("input")) {
      c.manifest = resolve(base_dir, j["input"].value("manifest", std::string{}));
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      c.bank_path = resolve(base_dir, o.value("bank", std::string{}));
      c.report_path = resolve(base_dir, o.value("report", std::string{}));
      c.bench_csv = resolve(base_dir, o.value("bench_csv", std::string{}));
    }
    if (j.contains("cost")) {
      const auto& o = j["cost"];
      read_into(o, "lambda1", c.weights.lambda1);
      read_into(o, "lambda2", c.weights.lambda2);
      read_into(o, "lambda3", c.weights.lambda3);
      read_into(o, "gamma", c.weights.gamma);
      if (o.contains("c_surface") && !o["c_surface"].is_null()) {
        c.weights.c_surface = o["c_surface"].get<double>();
      }
    }
    if (j.contains("swarm")) {
      const auto& o = j["swarm"];
      read_into(o, "n_swarm", c.swarm.n_swarm);
      read_into(o, "n_iter", c.swarm.n_iter);
      read_into(o, "w_init", c.swarm.w_init);
      read_into(o, "w_end", c.swarm.w_end);
      read_into(o, "c1", c.swarm.c1);
      read_into(o, "c2", c.swarm.c2);
      read_into(o, "c_noise", c.swarm.c_noise);
    }
    if (j.contains("anchors")) {
      for (const auto& [cls, a] : j["anchors"].items()) {
        c.anchors[cls] = make_anchor(cls, read_dims(a.at("min"), "anchors." + cls + ".min"),
                                     read_dims(a.at("max"), "anchors." + cls + ".max"));
      }
    }
    if (j.contains("filters")) {
      const auto& o = j["filters"];
      if (o.contains("tau_occ")) {
        for (const auto& [cls, tau] : o["tau_occ"].items()) c.filters.tau_occ[cls] = tau.get<double>();
      }
      read_into(o, "tau_res", c.filters.tau_res);
      read_into(o, "tau_mv", c.filters.tau_mv);
    }
    if (j.contains("association")) {
      const auto& o = j["association"];
      read_into(o, "tau_match", c.association.tau_match);
      read_into(o, "d_min", c.association.d_min);
      read_into(o, "d_max", c.association.d_max);
      const std::string crit = o.value("criterion", std::string("closest_point"));
      if (crit == "closest_point") {
        c.association.criterion = assoc::MatchCriterion::kClosestPoint;
      } else if (crit == "centroid") {
        c.association.criterion = assoc::MatchCriterion::kCentroid;
      } else {
        throw ValidationError("association.criterion must be closest_point or centroid");
      }
    }
    if (j.contains("clustering")) {
      const auto& o = j["clustering"];
      read_into(o, "eps", c.clustering.eps);
      read_into(o, "min_pts", c.clustering.min_pts);
      read_into(o, "ground_cell", c.clustering.ground.cell_size);
      read_into(o, "ground_height", c.clustering.ground.height_threshold);
      read_into(o, "ground_seed_quantile", c.clustering.ground.seed_quantile);
      read_into(o, "ground_refit_rounds", c.clustering.ground.refit_rounds);
      read_into(o, "ground_max_slope", c.clustering.ground.max_slope);
    }
    if (j.contains("bench")) {
      const auto& o = j["bench"];
      read_into(o, "instances", c.bench.instances);
      read_into(o, "budgets", c.bench.budgets);
      read_into(o, "class", c.bench.class_id);
      if (o.contains("range")) {
        const auto r = o["range"].get<std::vector<double>>();
        if (r.size() != 2) throw ValidationError("bench.range must have two entries");
        c.bench.range_min = r[0];
        c.bench.range_max = r[1];
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const PipelineConfig& c, bool include_paths) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["nms_iou"] = c.nms_iou;
  j["cost"] = {{"lambda1", c.weights.lambda1},
               {"lambda2", c.weights.lambda2},
               {"lambda3", c.weights.lambda3},
               {"gamma", c.weights.gamma},
               {"c_surface", c.weights.c_surface ? json(*c.weights.c_surface) : json(nullptr)}};
  j["swarm"] = {{"n_swarm", c.swarm.n_swarm}, {"n_iter", c.swarm.n_iter},
                {"w_init", c.swarm.w_init},   {"w_end", c.swarm.w_end},
                {"c1", c.swarm.c1},           {"c2", c.swarm.c2},
                {"c_noise", c.swarm.c_noise}};
  json anchors = json::object();
  for (const auto& [cls, a] : c.anchors) {
    anchors[cls] = {{"min", {a.dims_min.x(), a.dims_min.y(), a.dims_min.z()}},
                    {"max", {a.dims_max.x(), a.dims_max.y(), a.dims_max.z()}}};
  }
  j["anchors"] = anchors;
  j["filters"] = {{"tau_occ", c.filters.tau_occ},
                  {"tau_res", c.filters.tau_res},
                  {"tau_mv", c.filters.tau_mv}};
  j["association"] = {
      {"tau_match", c.association.tau_match},
      {"d_min", c.association.d_min},
      {"d_max", c.association.d_max},
      {"criterion", c.association.criterion == assoc::MatchCriterion::kCentroid ? "centroid"
                                                                                 : "closest_point"}};
  j["clustering"] = {{"eps", c.clustering.eps},
                     {"min_pts", c.clustering.min_pts},
                     {"ground_cell", c.clustering.ground.cell_size},
                     {"ground_height", c.clustering.ground.height_threshold},
                     {"ground_seed_quantile", c.clustering.ground.seed_quantile},
                     {"ground_refit_rounds", c.clustering.ground.refit_rounds},
                     {"ground_max_slope", c.clustering.ground.max_slope}};
  j["bench"] = {{"instances", c.bench.instances},
                {"budgets", c.bench.budgets},
                {"class", c.bench.class_id},
                {"range", {c.bench.range_min, c.bench.range_max}}};
  if (include_paths) {
    j["input"] = {{"manifest", c.manifest.string()}};
    j["output"] = {{"bank", c.bank_path.string()},
                   {"report", c.report_path.string()},
                   {"bench_csv", c.bench_csv.string()}};
  }
  return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace novelbox::pipeline
