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

#include <catch2/catch.hpp>
#include <filesystem>
#include <set>

#include "soundscene/synth/annotation.hpp"
#include "soundscene/synth/corpus.hpp"
#include "soundscene/synth/ontology.hpp"
#include "soundscene/synth/plan.hpp"
#include "soundscene/synth/procgen.hpp"
#include "soundscene/synth/render.hpp"
#include "support/oracles.hpp"

using namespace soundscene;
using namespace soundscene::synth;

namespace {

EventCorpus tiny_corpus(const std::vector<std::string>& classes, double duration_s = 0.5,
                        int sources_per_class = 2, int sample_rate = 44100) {
  EventCorpus corpus;
  std::uint64_t stream = 0;
  for (const auto& cls : classes) {
    for (int s = 0; s < sources_per_class; ++s) {
      const auto raw = procgen::make_event_clip(
          static_cast<procgen::EventSignature>(stream % 6), duration_s, sample_rate,
          derive_seed(404, stream));
      ++stream;
      RawSource src{cls, "s" + std::to_string(s), ""};
      for (auto& e : EventCorpus::prepare_source(src, raw, sample_rate)) corpus.add(std::move(e));
    }
  }
  return corpus;
}

SceneOntology two_scene_ontology() {
  SceneOntology ont;
  ont.scene_classes = {"alpha", "beta"};
  ont.event_classes = {"ping", "buzz", "hum"};
  ont.compatibility["alpha"] = {"ping", "buzz"};
  ont.compatibility["beta"] = {"buzz", "hum"};
  return ont;
}

}  // namespace

TEST_CASE("default ontology has 10 scenes and 32 events") {
  const auto ont = dcase2013_ontology();
  CHECK(ont.scene_classes.size() == 10);
  CHECK(ont.event_classes.size() == 32);
  ont.validate();
}

TEST_CASE("default ontology keeps the designated single-scene events") {
  const auto ont = dcase2013_ontology();
  const auto singles = ont.single_scene_events();
  CHECK(std::find(singles.begin(), singles.end(), "lake") != singles.end());
  CHECK(std::find(singles.begin(), singles.end(), "trolley") != singles.end());
  // widely shared classes really are shared
  for (const auto& cls : {"speech", "footsteps", "laughter", "wind"})
    CHECK(std::find(singles.begin(), singles.end(), cls) == singles.end());
  // quietstreet has no supermarket checkout sounds
  CHECK_FALSE(ont.is_compatible("quietstreet", "checkout_beeps"));
}

TEST_CASE("ontology round-trips through its text format") {
  const auto ont = dcase2013_ontology();
  const auto parsed = parse_ontology(format_ontology(ont));
  CHECK(parsed.scene_classes == ont.scene_classes);
  CHECK(parsed.event_classes == ont.event_classes);
  CHECK(parsed.compatibility == ont.compatibility);
}

TEST_CASE("ontology parser reports unknown keys and bad references") {
  CHECK_THROWS_AS(parse_ontology("bogus_key: a, b\n"), Error);
  CHECK_THROWS_AS(parse_ontology("scene_classes: a\nevent_classes: x\nscene.a: y\n"), Error);
  // missing ':' is a parse error with a line number
  CHECK_THROWS_WITH(parse_ontology("scene_classes a\n"),
                    Catch::Contains("line 1"));
}

TEST_CASE("draw_event_count covers [1, (E+1)*3]") {
  const auto ont = dcase2013_ontology();
  Rng rng(123);
  std::set<int> bus_counts, office_counts;
  for (int i = 0; i < 4000; ++i) {
    const int n = draw_event_count("bus", ont, rng);  // E = 6
    CHECK(n >= 1);
    CHECK(n <= 21);
    bus_counts.insert(n);
    const int m = draw_event_count("office", ont, rng);  // E = 8
    CHECK(m >= 1);
    CHECK(m <= 27);
    office_counts.insert(m);
  }
  // the bounds are actually reached
  CHECK(bus_counts.count(1) == 1);
  CHECK(bus_counts.count(21) == 1);
  CHECK(office_counts.count(27) == 1);

  SceneOntology tiny;
  tiny.scene_classes = {"solo"};
  tiny.event_classes = {"only"};
  tiny.compatibility["solo"] = {"only"};
  for (int i = 0; i < 200; ++i) {
    const int n = draw_event_count("solo", tiny, rng);  // E = 1
    CHECK(n >= 1);
    CHECK(n <= 6);
  }
  CHECK_THROWS_AS(draw_event_count("nope", ont, rng), Error);
}

TEST_CASE("plan_scene is deterministic for a fixed seed") {
  const auto ont = two_scene_ontology();
  const auto corpus = tiny_corpus(ont.event_classes);
  SynthParams params;
  params.scene_duration_s = 10.0;
  const auto a = plan_scene("alpha", "bg0", ont, corpus, 42, params);
  const auto b = plan_scene("alpha", "bg0", ont, corpus, 42, params);
  CHECK(plan_to_json(a, corpus).dump() == plan_to_json(b, corpus).dump());
  const auto c = plan_scene("alpha", "bg0", ont, corpus, 43, params);
  CHECK(plan_to_json(a, corpus).dump() != plan_to_json(c, corpus).dump());
}

TEST_CASE("plan_scene only places compatible classes") {
  const auto ont = two_scene_ontology();
  const auto corpus = tiny_corpus(ont.event_classes);
  SynthParams params;
  params.scene_duration_s = 10.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto plan = plan_scene("alpha", "bg0", ont, corpus, seed, params);
    for (const auto& p : plan.placements) {
      CHECK(ont.is_compatible("alpha", p.event_class));
      CHECK(p.event_class != "hum");
    }
  }
}

TEST_CASE("plan_scene enforces the polyphony cap under pressure") {
  // long events in a short scene force retries and drops
  SceneOntology ont;
  ont.scene_classes = {"crowded"};
  ont.event_classes = {"a", "b", "c", "d", "e", "f", "g", "h"};
  ont.compatibility["crowded"] = ont.event_classes;
  const auto corpus = tiny_corpus(ont.event_classes, 4.0, 1);
  SynthParams params;
  params.scene_duration_s = 10.0;

  bool saw_drop = false;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto plan = plan_scene("crowded", "bg0", ont, corpus, seed, params);
    std::vector<std::pair<double, double>> intervals;
    for (const auto& p : plan.placements)
      intervals.emplace_back(p.onset_s, p.onset_s + p.est_duration_s);
    CHECK(oracle::max_concurrency(intervals) <= params.polyphony_max);
    for (const auto& p : plan.placements) {
      CHECK(p.onset_s >= 0.0);
      CHECK(p.onset_s + p.est_duration_s <= params.scene_duration_s);
    }
    saw_drop = saw_drop || !plan.dropped.empty();
  }
  CHECK(saw_drop);
}

TEST_CASE("plan_scene respects randomization ranges") {
  const auto ont = two_scene_ontology();
  const auto corpus = tiny_corpus(ont.event_classes);
  SynthParams params;
  params.scene_duration_s = 10.0;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto plan = plan_scene("beta", "bg1", ont, corpus, seed, params);
    for (const auto& p : plan.placements) {
      CHECK(std::fabs(p.pitch_semitones) <= params.event_pitch_range_semitones);
      CHECK(p.stretch_ratio >= params.stretch_min);
      CHECK(p.stretch_ratio <= params.stretch_max);
      CHECK(p.snr_db >= params.snr_min_db);
      CHECK(p.snr_db <= params.snr_max_db);
    }
  }
}

TEST_CASE("snr_gain identities") {
  Rng rng(9);
  std::vector<double> a(1000), b(1000);
  for (auto& v : a) v = rng.uniform(-0.5, 0.5);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = a[i];  // equal RMS
  CHECK(snr_gain(a, b, 0, b.size(), 0.0) == Approx(0.0).margin(1e-12));

  std::vector<double> tenth = a;
  for (auto& v : tenth) v *= 0.1;
  CHECK(snr_gain(tenth, b, 0, b.size(), 0.0) == Approx(20.0).margin(1e-9));
}

TEST_CASE("snr_gain hits the target after application") {
  Rng rng(31);
  std::vector<double> event(2000), bg(20000);
  for (auto& v : event) v = rng.uniform(-1, 1);
  for (auto& v : bg) v = rng.uniform(-0.3, 0.3);
  const std::size_t begin = 5000, end = 7000;
  const double g = snr_gain(event, bg, begin, end, -15.0);
  std::vector<double> scaled = event;
  const double lin = std::pow(10.0, g / 20.0);
  for (auto& v : scaled) v *= lin;
  const double measured =
      20.0 * std::log10(oracle::rms_of(scaled, 0, scaled.size()) / oracle::rms_of(bg, begin, end));
  CHECK(measured == Approx(-15.0).margin(0.1));
}

TEST_CASE("snr_gain falls back to full-file RMS for a silent span") {
  std::vector<double> event(100, 0.5);
  std::vector<double> bg(1000, 0.0);
  for (std::size_t i = 0; i < 500; ++i) bg[i] = 0.25;  // first half loud, second silent
  const double g = snr_gain(event, bg, 600, 700, 0.0);
  const double full_rms = oracle::rms_of(bg, 0, bg.size());
  CHECK(g == Approx(-20.0 * std::log10(0.5 / full_rms)).margin(1e-9));
  std::vector<double> all_silent(1000, 0.0);
  CHECK_THROWS_AS(snr_gain(event, all_silent, 0, 100, 0.0), Error);
}

TEST_CASE("render_scene with no placements is the attenuated normalized background") {
  const auto ont = two_scene_ontology();
  const auto corpus = tiny_corpus(ont.event_classes);
  SynthParams params;
  params.scene_duration_s = 2.0;
  const auto bg = procgen::make_background_clip(0, 2, 3.0, params.sample_rate, 7);

  ScenePlan plan;
  plan.scene_class = "alpha";
  plan.background_id = "bg0";
  const auto result = render_scene(plan, corpus, bg, params);

  CHECK(result.annotation.events.empty());
  CHECK(result.audio.size() == static_cast<std::size_t>(2 * params.sample_rate));
  // attenuation followed by a single peak normalization
  audio::AudioClip expect;
  expect.sample_rate = params.sample_rate;
  expect.samples.assign(bg.samples.begin(), bg.samples.begin() + 2 * params.sample_rate);
  expect = audio::peak_normalize(audio::apply_gain(expect, params.background_attenuation_db));
  for (std::size_t i = 0; i < expect.samples.size(); ++i)
    CHECK(result.audio.samples[i] == Approx(expect.samples[i]).margin(1e-12));
}

TEST_CASE("render_scene realizes the planned SNR within 0.5 dB") {
  const auto ont = two_scene_ontology();
  const auto corpus = tiny_corpus(ont.event_classes, 0.4);
  SynthParams params;
  params.scene_duration_s = 3.0;
  const auto bg = procgen::make_background_clip(1, 2, 4.0, params.sample_rate, 11);

  for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
    const auto plan = plan_scene("alpha", "bg0", ont, corpus, seed, params);
    const auto result = render_scene(plan, corpus, bg, params);
    REQUIRE(result.realized.size() == plan.placements.size());

    // oracle: re-render each stem separately and measure the RMS ratio
    audio::AudioClip bg_stem;
    bg_stem.sample_rate = params.sample_rate;
    bg_stem.samples.assign(bg.samples.begin(), bg.samples.begin() + 3 * params.sample_rate);
    bg_stem = audio::apply_gain(bg_stem, params.background_attenuation_db);
    for (std::size_t i = 0; i < plan.placements.size(); ++i) {
      const auto& p = plan.placements[i];
      auto stem = corpus.entry(p.corpus_entry).clip;
      stem = audio::time_stretch(audio::pitch_shift(stem, p.pitch_semitones), p.stretch_ratio);
      stem = audio::apply_gain(stem, result.realized[i].gain_db);
      const auto begin = static_cast<std::size_t>(std::llround(p.onset_s * params.sample_rate));
      const double snr =
          20.0 * std::log10(oracle::rms_of(stem.samples, 0, stem.size()) /
                            oracle::rms_of(bg_stem.samples, begin, begin + stem.size()));
      CHECK(snr == Approx(p.snr_db).margin(0.5));
    }
  }
}

TEST_CASE("render_scene annotation offsets match plan estimates within a frame") {
  const auto ont = two_scene_ontology();
  const auto corpus = tiny_corpus(ont.event_classes, 0.6);
  SynthParams params;
  params.scene_duration_s = 4.0;
  const auto bg = procgen::make_background_clip(0, 2, 5.0, params.sample_rate, 3);
  const auto plan = plan_scene("beta", "bg0", ont, corpus, 77, params);
  const auto result = render_scene(plan, corpus, bg, params);

  const double frame_s = 512.0 / 22050.0;
  AnnotationTrack recomputed = result.annotation;  // same sort as render
  std::vector<AnnotatedEvent> expect;
  for (const auto& p : plan.placements)
    expect.push_back({p.onset_s, p.onset_s + p.est_duration_s, p.event_class});
  std::stable_sort(expect.begin(), expect.end(),
                   [](const auto& a, const auto& b) { return a.onset_s < b.onset_s; });
  REQUIRE(recomputed.events.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(recomputed.events[i].label == expect[i].label);
    CHECK(recomputed.events[i].onset_s == Approx(expect[i].onset_s).margin(1e-12));
    CHECK(recomputed.events[i].offset_s == Approx(expect[i].offset_s).margin(frame_s));
  }
  result.annotation.validate(&ont);
}

TEST_CASE("render_scene output is exactly the configured duration and normalized") {
  const auto ont = two_scene_ontology();
  const auto corpus = tiny_corpus(ont.event_classes, 0.3);
  SynthParams params;
  params.scene_duration_s = 2.5;
  const auto bg = procgen::make_background_clip(1, 2, 3.0, params.sample_rate, 19);
  const auto plan = plan_scene("alpha", "bg0", ont, corpus, 3, params);
  const auto result = render_scene(plan, corpus, bg, params);
  CHECK(result.audio.size() ==
        static_cast<std::size_t>(std::llround(params.scene_duration_s * params.sample_rate)));
  CHECK(audio::peak_amplitude(result.audio) == Approx(1.0).margin(1e-9));
}

TEST_CASE("augment_scene_pitch yields two bounded variants with identical annotations") {
  const auto bg = procgen::make_background_clip(0, 3, 1.5, 44100, 23);
  AnnotationTrack ann;
  ann.scene_label = "alpha";
  ann.duration_s = 1.5;
  ann.events.push_back({0.25, 0.75, "ping"});

  Rng rng(55);
  const auto variants = augment_scene_pitch(bg, ann, rng, 6.0);
  REQUIRE(variants.size() == 2);
  CHECK(variants[0].shift_semitones >= 1.0);
  CHECK(variants[0].shift_semitones <= 6.0);
  CHECK(variants[1].shift_semitones <= -1.0);
  CHECK(variants[1].shift_semitones >= -6.0);
  for (const auto& v : variants) {
    CHECK(format_annotation(v.annotation) == format_annotation(ann));
    CHECK(v.audio.size() == bg.size());
  }
}

TEST_CASE("annotation text round-trips") {
  AnnotationTrack empty;
  empty.scene_label = "park";
  empty.duration_s = 30.0;
  const auto back = parse_annotation(format_annotation(empty));
  CHECK(back.scene_label == "park");
  CHECK(back.duration_s == Approx(30.0));
  CHECK(back.events.empty());

  AnnotationTrack track;
  track.scene_label = "office";
  track.duration_s = 30.0;
  Rng rng(2);
  for (int i = 0; i < 21; ++i) {
    const double onset = std::floor(rng.uniform(0.0, 25.0) * 1e6) / 1e6;
    const double offset = onset + std::floor(rng.uniform(0.1, 4.0) * 1e6) / 1e6;
    track.events.push_back({onset, offset, i % 2 ? "phone" : "knock"});
  }
  const auto parsed = parse_annotation(format_annotation(track));
  REQUIRE(parsed.events.size() == 21);
  // events come back sorted by onset with 6-decimal precision
  for (std::size_t i = 1; i < parsed.events.size(); ++i)
    CHECK(parsed.events[i - 1].onset_s <= parsed.events[i].onset_s);
  AnnotationTrack sorted = track;
  sorted.sort_by_onset();
  for (std::size_t i = 0; i < parsed.events.size(); ++i) {
    CHECK(parsed.events[i].onset_s == Approx(sorted.events[i].onset_s).margin(1e-6));
    CHECK(parsed.events[i].offset_s == Approx(sorted.events[i].offset_s).margin(1e-6));
    CHECK(parsed.events[i].label == sorted.events[i].label);
  }
}

TEST_CASE("annotation parser flags malformed lines with their number") {
  CHECK_THROWS_WITH(parse_annotation("# scene: bus\n0.5\t1.0\n"), Catch::Contains("line 2"));
  CHECK_THROWS_WITH(parse_annotation("# scene: bus\nonset\t1.0\tspeech\n"),
                    Catch::Contains("line 2"));
  CHECK_THROWS_WITH(parse_annotation("0.5\t1.0\tspeech\n"), Catch::Contains("scene"));
}

TEST_CASE("corpus preparation triples sources and normalizes before gain") {
  const auto raw = procgen::make_event_clip(procgen::EventSignature::tone_low, 0.3, 44100, 99);
  RawSource src{"tone_low", "s0", ""};
  const auto entries = EventCorpus::prepare_source(src, raw, 44100);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].gain_variant_db == -10.0);
  CHECK(entries[1].gain_variant_db == 0.0);
  CHECK(entries[2].gain_variant_db == 10.0);
  // the 0 dB variant is peak-normalized; others scale from it
  CHECK(audio::peak_amplitude(entries[1].clip) == Approx(1.0).margin(1e-9));
  CHECK(audio::peak_amplitude(entries[0].clip) == Approx(std::pow(10.0, -0.5)).margin(1e-9));
  CHECK(audio::peak_amplitude(entries[2].clip) == Approx(std::pow(10.0, 0.5)).margin(1e-9));
  // leading pad got stripped
  CHECK(std::fabs(entries[1].clip.samples[0]) > 1e-3);
}

TEST_CASE("procedural corpus generator writes a loadable corpus") {
  namespace fs = std::filesystem;
  const std::string dir = "procgen_test_out";
  fs::remove_all(dir);
  ProcCorpusParams params;
  params.n_scenes = 2;
  params.n_events = 3;
  params.locations_per_scene = 2;
  params.sources_per_event = 2;
  params.background_duration_s = 1.0;
  params.event_min_duration_s = 0.2;
  params.event_max_duration_s = 0.3;
  params.sample_rate = 22050;
  params.seed = 5;

  const auto out = generate_procedural_corpus(params, dir);
  CHECK(out.backgrounds.size() == 4);
  CHECK(out.sources.size() == 6);
  const auto ont = load_ontology(out.ontology_path);
  CHECK(ont.scene_classes.size() == 2);
  CHECK(ont.event_classes.size() == 3);
  const auto bgs = read_background_manifest(out.background_manifest_path);
  CHECK(bgs.size() == 4);
  const auto sources = read_source_manifest(out.event_manifest_path);
  CHECK(sources.size() == 6);
  for (const auto& s : sources) {
    const auto clip = audio::read_wav(s.path);
    CHECK(clip.sample_rate == 22050);
    CHECK(clip.duration_s() > 0.15);
  }

  // determinism: regenerating produces identical bytes
  const auto wav0 = [&] {
    std::ifstream f(out.sources[0].path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  }();
  fs::remove_all(dir);
  generate_procedural_corpus(params, dir);
  const auto wav1 = [&] {
    std::ifstream f(out.sources[0].path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  }();
  CHECK(wav0 == wav1);
  fs::remove_all(dir);
}
