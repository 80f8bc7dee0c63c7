// Copyright 2026 The soundscene authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "soundscene/common.hpp"
#include "soundscene/synth/rng.hpp"

namespace soundscene::features {

/// Per-recording metadata needed for splitting.
struct RecordingMeta {
  std::string id;
  std::string scene_class;
  std::string location_id;  // the background recording location
};

struct FoldSplit {
  int fold_id = 0;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

/// Stratified grouped k-fold: locations are dealt round-robin per scene class
/// so folds are class balanced, and every recording of a location lands on
/// one side of each train/test divide. Validation is a stratified fraction of
/// the non-test recordings (location sharing with train is allowed there).
inline std::vector<FoldSplit> make_folds(const std::vector<RecordingMeta>& manifest, int k,
                                         std::uint64_t seed, double validation_fraction = 0.125) {
  check(k >= 2, "need at least 2 folds");
  check(!manifest.empty(), "empty dataset manifest");
  check(validation_fraction >= 0.0 && validation_fraction < 1.0,
        "validation fraction must be in [0, 1)");

  // location -> (scene, recording ids); classes and locations sorted for
  // deterministic iteration regardless of manifest order
  std::map<std::string, std::vector<std::string>> class_locations;
  std::map<std::string, std::vector<std::string>> location_recordings;
  std::map<std::string, std::string> location_scene;
  for (const auto& r : manifest) {
    if (!location_scene.count(r.location_id)) {
      location_scene[r.location_id] = r.scene_class;
      class_locations[r.scene_class].push_back(r.location_id);
    } else {
      check(location_scene[r.location_id] == r.scene_class,
            "location appears under two scene classes: " + r.location_id);
    }
    location_recordings[r.location_id].push_back(r.id);
  }
  for (auto& [loc, ids] : location_recordings) std::sort(ids.begin(), ids.end());

  // assign each location to a test fold
  std::map<std::string, int> location_fold;
  std::uint64_t class_index = 0;
  for (auto& [scene, locations] : class_locations) {
    check(static_cast<int>(locations.size()) >= k,
          "scene class '" + scene + "' has fewer background locations than folds");
    std::sort(locations.begin(), locations.end());
    Rng rng(derive_seed(seed, class_index++));
    rng.shuffle(locations);
    for (std::size_t i = 0; i < locations.size(); ++i)
      location_fold[locations[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }

  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    FoldSplit& split = folds[static_cast<std::size_t>(f)];
    split.fold_id = f;

    // class -> non-test recordings, for stratified validation selection
    std::map<std::string, std::vector<std::string>> trainval_by_class;
    for (const auto& [loc, ids] : location_recordings) {
      if (location_fold.at(loc) == f) {
        split.test.insert(split.test.end(), ids.begin(), ids.end());
      } else {
        auto& bucket = trainval_by_class[location_scene.at(loc)];
        bucket.insert(bucket.end(), ids.begin(), ids.end());
      }
    }

    std::uint64_t val_stream = 1000 + static_cast<std::uint64_t>(f);
    for (auto& [scene, ids] : trainval_by_class) {
      std::sort(ids.begin(), ids.end());
      Rng rng(derive_seed(seed, val_stream));
      val_stream += 1000;
      rng.shuffle(ids);
      const auto n_val = static_cast<std::size_t>(
          std::llround(validation_fraction * static_cast<double>(ids.size())));
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i < n_val)
          split.validation.push_back(ids[i]);
        else
          split.train.push_back(ids[i]);
      }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
  }
  return folds;
}

inline nlohmann::json folds_to_json(const std::vector<FoldSplit>& folds, std::uint64_t seed,
                                    double validation_fraction) {
  nlohmann::json j;
  j["k"] = folds.size();
  j["seed"] = seed;
  j["validation_fraction"] = validation_fraction;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : folds) {
    j["folds"].push_back({{"fold", f.fold_id},
                          {"train", f.train},
                          {"validation", f.validation},
                          {"test", f.test}});
  }
  return j;
}

inline std::vector<FoldSplit> folds_from_json(const nlohmann::json& j) {
  std::vector<FoldSplit> out;
  for (const auto& fj : j.at("folds")) {
    FoldSplit f;
    f.fold_id = fj.at("fold").get<int>();
    f.train = fj.at("train").get<std::vector<std::string>>();
    f.validation = fj.at("validation").get<std::vector<std::string>>();
    f.test = fj.at("test").get<std::vector<std::string>>();
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace soundscene::features
