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

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "soundscene/audio/clip.hpp"
#include "soundscene/audio/resample.hpp"
#include "soundscene/audio/wav.hpp"
#include "soundscene/common.hpp"

namespace soundscene::synth {

/// A raw isolated-event recording before corpus preparation.
struct RawSource {
  std::string event_class;
  std::string source_id;
  std::string path;
};

/// One usable corpus entry: a prepared clip at a fixed gain variant.
struct CorpusEntry {
  std::string event_class;
  std::string source_id;
  double gain_variant_db = 0.0;  // -10, 0 or +10
  audio::AudioClip clip;

  std::string id() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+g", gain_variant_db);
    return event_class + "/" + source_id + "@" + buf + "dB";
  }
};

/// Prepared event corpus. Every source appears exactly three times, once per
/// gain variant (-10 dB, 0 dB, +10 dB), each normalized and silence-trimmed
/// before the variant gain is applied.
class EventCorpus {
 public:
  static constexpr double kGainVariantsDb[3] = {-10.0, 0.0, 10.0};

  void add(CorpusEntry entry) {
    by_class_[entry.event_class].push_back(entries_.size());
    entries_.push_back(std::move(entry));
  }

  std::size_t size() const { return entries_.size(); }
  const CorpusEntry& entry(std::size_t i) const { return entries_.at(i); }

  bool has_class(const std::string& event_class) const {
    const auto it = by_class_.find(event_class);
    return it != by_class_.end() && !it->second.empty();
  }

  const std::vector<std::size_t>& entries_for(const std::string& event_class) const {
    const auto it = by_class_.find(event_class);
    check(it != by_class_.end() && !it->second.empty(),
          "corpus has no entries for event class: " + event_class);
    return it->second;
  }

  std::vector<std::string> classes() const {
    std::vector<std::string> out;
    for (const auto& [cls, idx] : by_class_)
      if (!idx.empty()) out.push_back(cls);
    return out;
  }

  /// Normalize, trim, resample, then emit the three gain variants of a clip.
  static std::vector<CorpusEntry> prepare_source(const RawSource& src,
                                                 const audio::AudioClip& raw, int target_rate,
                                                 double trim_threshold_db = -60.0) {
    audio::AudioClip prepared = audio::peak_normalize(raw);
    prepared = audio::trim_leading_silence(prepared, trim_threshold_db);
    prepared = audio::resample(prepared, target_rate);
    std::vector<CorpusEntry> out;
    for (double gain_db : kGainVariantsDb) {
      CorpusEntry e;
      e.event_class = src.event_class;
      e.source_id = src.source_id;
      e.gain_variant_db = gain_db;
      e.clip = audio::apply_gain(prepared, gain_db);
      out.push_back(std::move(e));
    }
    return out;
  }

 private:
  std::vector<CorpusEntry> entries_;
  std::map<std::string, std::vector<std::size_t>> by_class_;
};

/// One background recording: a scene class, the recording location it came
/// from (the grouping unit of the fold splits), and its audio file.
struct BackgroundEntry {
  std::string scene_class;
  std::string location_id;
  std::string path;
};

namespace detail_tsv {

inline std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                       std::size_t n_fields) {
  std::ifstream file(path);
  check(file.good(), "cannot open manifest: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    check(fields.size() == n_fields, "manifest parse error at line " + std::to_string(line_no) +
                                         " of " + path + ": expected " +
                                         std::to_string(n_fields) + " tab-separated fields");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace detail_tsv

/// Raw event manifest rows: event_class<TAB>source_id<TAB>path.
inline std::vector<RawSource> read_source_manifest(const std::string& path) {
  std::vector<RawSource> out;
  for (const auto& row : detail_tsv::read_rows(path, 3))
    out.push_back({row[0], row[1], row[2]});
  return out;
}

/// Background manifest rows: scene_class<TAB>location_id<TAB>path.
inline std::vector<BackgroundEntry> read_background_manifest(const std::string& path) {
  std::vector<BackgroundEntry> out;
  for (const auto& row : detail_tsv::read_rows(path, 3))
    out.push_back({row[0], row[1], row[2]});
  return out;
}

/// Prepared corpus index rows: event_class<TAB>source_id<TAB>gain_db<TAB>path.
struct CorpusIndexRow {
  std::string event_class;
  std::string source_id;
  double gain_db = 0.0;
  std::string path;
};

inline std::vector<CorpusIndexRow> read_corpus_index(const std::string& path) {
  std::vector<CorpusIndexRow> out;
  for (const auto& row : detail_tsv::read_rows(path, 4)) {
    CorpusIndexRow r;
    r.event_class = row[0];
    r.source_id = row[1];
    try {
      r.gain_db = std::stod(row[2]);
    } catch (const std::exception&) {
      fail("bad gain value in corpus index: " + row[2]);
    }
    r.path = row[3];
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_corpus_index(const std::vector<CorpusIndexRow>& rows, const std::string& path) {
  std::ofstream file(path);
  check(file.good(), "cannot open for writing: " + path);
  file << "# event_class\tsource_id\tgain_db\tpath\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%g", r.gain_db);
    file << r.event_class << "\t" << r.source_id << "\t" << buf << "\t" << r.path << "\n";
  }
  check(file.good(), "write failed: " + path);
}

/// Load a prepared corpus (clips included) from its on-disk index.
inline EventCorpus load_corpus(const std::string& index_path) {
  EventCorpus corpus;
  for (const auto& row : read_corpus_index(index_path)) {
    CorpusEntry e;
    e.event_class = row.event_class;
    e.source_id = row.source_id;
    e.gain_variant_db = row.gain_db;
    e.clip = audio::read_wav(row.path);
    corpus.add(std::move(e));
  }
  check(corpus.size() > 0, "corpus index is empty: " + index_path);
  return corpus;
}

}  // namespace soundscene::synth
