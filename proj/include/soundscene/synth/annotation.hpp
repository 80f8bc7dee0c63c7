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
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "soundscene/common.hpp"
#include "soundscene/synth/ontology.hpp"

namespace soundscene::synth {

struct AnnotatedEvent {
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::string label;
};

/// Ground-truth track for one rendered recording: the scene label plus the
/// (onset, offset, label) list of its events, kept sorted by onset.
struct AnnotationTrack {
  std::string scene_label;
  double duration_s = 30.0;
  std::vector<AnnotatedEvent> events;

  void sort_by_onset() {
    std::stable_sort(events.begin(), events.end(),
                     [](const AnnotatedEvent& a, const AnnotatedEvent& b) {
                       return a.onset_s < b.onset_s;
                     });
  }

  void validate(const SceneOntology* ontology = nullptr) const {
    for (const auto& e : events) {
      check(e.onset_s >= 0.0 && e.onset_s < e.offset_s && e.offset_s <= duration_s + 1e-9,
            "annotation event outside [0, duration]: " + e.label);
      if (ontology) {
        check(ontology->event_index(e.label) >= 0, "unknown event label: " + e.label);
      }
    }
    if (ontology) check(ontology->scene_index(scene_label) >= 0, "unknown scene label: " + scene_label);
  }
};

inline std::string format_annotation(const AnnotationTrack& track) {
  AnnotationTrack sorted = track;
  sorted.sort_by_onset();
  std::ostringstream out;
  out << "# scene: " << sorted.scene_label << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "# duration: %.6f\n", sorted.duration_s);
  out << buf;
  for (const auto& e : sorted.events) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f\t", e.onset_s, e.offset_s);
    out << buf << e.label << "\n";
  }
  return out.str();
}

inline AnnotationTrack parse_annotation(const std::string& text) {
  AnnotationTrack track;
  bool have_scene = false;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string scene_prefix = "# scene:";
      const std::string dur_prefix = "# duration:";
      if (line.rfind(scene_prefix, 0) == 0) {
        track.scene_label = detail::trim_ws(line.substr(scene_prefix.size()));
        have_scene = true;
      } else if (line.rfind(dur_prefix, 0) == 0) {
        track.duration_s = std::stod(line.substr(dur_prefix.size()));
      }
      continue;
    }
    std::stringstream fields(line);
    AnnotatedEvent e;
    std::string onset_str, offset_str;
    if (!std::getline(fields, onset_str, '\t') || !std::getline(fields, offset_str, '\t') ||
        !std::getline(fields, e.label)) {
      fail("annotation parse error at line " + std::to_string(line_no) +
           ": expected onset<TAB>offset<TAB>label");
    }
    try {
      e.onset_s = std::stod(onset_str);
      e.offset_s = std::stod(offset_str);
    } catch (const std::exception&) {
      fail("annotation parse error at line " + std::to_string(line_no) + ": bad number");
    }
    e.label = detail::trim_ws(e.label);
    check(!e.label.empty(),
          "annotation parse error at line " + std::to_string(line_no) + ": empty label");
    track.events.push_back(e);
  }
  check(have_scene, "annotation parse error: missing '# scene:' header");
  return track;
}

inline void write_annotation(const AnnotationTrack& track, const std::string& path) {
  std::ofstream file(path);
  check(file.good(), "cannot open for writing: " + path);
  file << format_annotation(track);
  check(file.good(), "write failed: " + path);
}

inline AnnotationTrack read_annotation(const std::string& path) {
  std::ifstream file(path);
  check(file.good(), "cannot open annotation: " + path);
  std::stringstream buf;
  buf << file.rdbuf();
  return parse_annotation(buf.str());
}

}  // namespace soundscene::synth
