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
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "soundscene/common.hpp"

namespace soundscene::synth {

/// Scene and event label sets plus the scene -> compatible-events map.
/// Label order is significant: it fixes the output column layout
/// (scene columns first, then event columns).
struct SceneOntology {
  std::vector<std::string> scene_classes;
  std::vector<std::string> event_classes;
  std::map<std::string, std::vector<std::string>> compatibility;

  int scene_index(const std::string& label) const {
    const auto it = std::find(scene_classes.begin(), scene_classes.end(), label);
    return it == scene_classes.end() ? -1 : static_cast<int>(it - scene_classes.begin());
  }

  int event_index(const std::string& label) const {
    const auto it = std::find(event_classes.begin(), event_classes.end(), label);
    return it == event_classes.end() ? -1 : static_cast<int>(it - event_classes.begin());
  }

  std::size_t num_labels() const { return scene_classes.size() + event_classes.size(); }

  const std::vector<std::string>& compatible_events(const std::string& scene) const {
    const auto it = compatibility.find(scene);
    check(it != compatibility.end(), "unknown scene class: " + scene);
    return it->second;
  }

  bool is_compatible(const std::string& scene, const std::string& event) const {
    const auto& list = compatible_events(scene);
    return std::find(list.begin(), list.end(), event) != list.end();
  }

  /// Event classes that appear in exactly one scene's compatibility list.
  std::vector<std::string> single_scene_events() const {
    std::map<std::string, int> count;
    for (const auto& [scene, events] : compatibility)
      for (const auto& e : events) ++count[e];
    std::vector<std::string> out;
    for (const auto& e : event_classes)
      if (count.count(e) && count.at(e) == 1) out.push_back(e);
    return out;
  }

  void validate() const {
    check(!scene_classes.empty(), "ontology has no scene classes");
    check(!event_classes.empty(), "ontology has no event classes");
    std::map<std::string, int> used;
    for (const auto& s : scene_classes) {
      const auto it = compatibility.find(s);
      check(it != compatibility.end(), "scene has no compatibility list: " + s);
      check(!it->second.empty(), "scene has an empty event list: " + s);
      for (const auto& e : it->second) {
        check(event_index(e) >= 0, "compatibility references unknown event: " + e);
        ++used[e];
      }
    }
    for (const auto& e : event_classes)
      check(used.count(e) > 0, "event class appears in no scene: " + e);
    for (const auto& [scene, events] : compatibility)
      check(scene_index(scene) >= 0, "compatibility references unknown scene: " + scene);
  }
};

namespace detail {

inline std::string trim_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim_ws(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// Parse the ontology config format:
///   scene_classes: a, b, c
///   event_classes: x, y, z
///   scene.a: x, y
/// Blank lines and '#' comments are ignored.
inline SceneOntology parse_ontology(const std::string& text) {
  SceneOntology ont;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim_ws(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    check(colon != std::string::npos,
          "ontology parse error at line " + std::to_string(line_no) + ": missing ':'");
    const std::string key = detail::trim_ws(line.substr(0, colon));
    const std::string value = line.substr(colon + 1);
    if (key == "scene_classes") {
      ont.scene_classes = detail::split_list(value);
    } else if (key == "event_classes") {
      ont.event_classes = detail::split_list(value);
    } else if (key.rfind("scene.", 0) == 0) {
      ont.compatibility[key.substr(6)] = detail::split_list(value);
    } else {
      fail("ontology parse error at line " + std::to_string(line_no) + ": unknown key '" + key +
           "'");
    }
  }
  ont.validate();
  return ont;
}

inline std::string format_ontology(const SceneOntology& ont) {
  std::ostringstream out;
  out << "# soundscene ontology\n";
  out << "scene_classes: ";
  for (std::size_t i = 0; i < ont.scene_classes.size(); ++i)
    out << (i ? ", " : "") << ont.scene_classes[i];
  out << "\nevent_classes: ";
  for (std::size_t i = 0; i < ont.event_classes.size(); ++i)
    out << (i ? ", " : "") << ont.event_classes[i];
  out << "\n";
  for (const auto& s : ont.scene_classes) {
    out << "scene." << s << ": ";
    const auto& events = ont.compatibility.at(s);
    for (std::size_t i = 0; i < events.size(); ++i) out << (i ? ", " : "") << events[i];
    out << "\n";
  }
  return out.str();
}

inline SceneOntology load_ontology(const std::string& path) {
  std::ifstream file(path);
  check(file.good(), "cannot open ontology: " + path);
  std::stringstream buf;
  buf << file.rdbuf();
  return parse_ontology(buf.str());
}

inline void save_ontology(const SceneOntology& ont, const std::string& path) {
  std::ofstream file(path);
  check(file.good(), "cannot open for writing: " + path);
  file << format_ontology(ont);
  check(file.good(), "write failed: " + path);
}

/// The DCASE 2013 scene set with its per-scene event groupings:
/// 10 scene classes, 32 event classes. lake (park) and trolley (supermarket)
/// are the designated single-scene events.
inline SceneOntology dcase2013_ontology() {
  SceneOntology ont;
  ont.scene_classes = {"bus",  "busystreet", "office",     "openairmarket", "park",
                       "quietstreet", "restaurant", "supermarket", "tube", "tubestation"};
  ont.event_classes = {
      "announcement", "bag_rustle", "birdsong",   "bus_passby", "chairs_moving",
      "checkout_beeps", "clear_throat", "cooking", "cough",      "doorclose",
      "doorslam",     "drawer",     "footsteps",  "footsteps_on_grass", "gate",
      "keys",         "key_lock",   "knock",      "lake",       "laughter",
      "light_rain",   "money",      "motorbike",  "phone",      "pushbike",
      "running",      "sliding_door_close", "speech", "switch", "train",
      "trolley",      "wind"};
  ont.compatibility["bus"] = {"clear_throat", "cough", "keys", "laughter", "phone", "speech"};
  ont.compatibility["busystreet"] = {"bus_passby", "doorclose", "footsteps", "key_lock",
                                     "knock",      "laughter",  "motorbike", "speech",
                                     "running",    "wind"};
  ont.compatibility["office"] = {"chairs_moving", "doorslam", "drawer",  "keys",
                                 "knock",         "laughter", "switch",  "phone"};
  ont.compatibility["openairmarket"] = {"bag_rustle", "bus_passby", "cooking",
                                        "footsteps",  "footsteps_on_grass", "light_rain",
                                        "money",      "speech",     "wind"};
  ont.compatibility["park"] = {"bus_passby", "birdsong", "footsteps_on_grass", "gate",
                               "lake",       "laughter", "light_rain",         "phone",
                               "pushbike",   "speech",   "wind"};
  ont.compatibility["quietstreet"] = {"birdsong",   "footsteps", "key_lock",
                                      "light_rain", "pushbike",  "wind"};
  ont.compatibility["restaurant"] = {"chairs_moving", "cooking", "doorclose",
                                     "footsteps",     "laughter", "speech"};
  ont.compatibility["supermarket"] = {"bag_rustle", "checkout_beeps", "footsteps",
                                      "money",      "switch",         "trolley"};
  ont.compatibility["tube"] = {"announcement", "bag_rustle", "footsteps", "phone",
                               "sliding_door_close", "speech", "train"};
  ont.compatibility["tubestation"] = {"announcement", "footsteps", "running",
                                      "sliding_door_close", "speech", "train"};
  ont.validate();
  return ont;
}

}  // namespace soundscene::synth
