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
//
// Acceptance suite: one criterion per number, one [PASS]/[FAIL] line each.
// Run with no arguments for all criteria, or pass the numbers to run.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "soundscene/eval/metrics.hpp"
#include "soundscene/nn/gradcheck.hpp"
#include "soundscene/pipeline/experiment.hpp"
#include "soundscene/pipeline/stages.hpp"
#include "soundscene/synth/procgen.hpp"
#include "support/fd.hpp"
#include "support/oracles.hpp"
#include "support/segment_oracle.hpp"

using namespace soundscene;
namespace fs = std::filesystem;
using Md = nn::Matrix<double>;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f.good()) return "<missing:" + path + ">";
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

Md random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Md m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = scale * rng.uniform(-1, 1);
  return m;
}

double projected_sum(const nn::Batch<double>& y, const nn::Batch<double>& proj) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i].array() * proj[i].array()).sum();
  return acc;
}

// ---------------------------------------------------------------------------
// criterion 1: gradient verification, every layer + composed net, 20 seeds

double check_conv(std::uint64_t seed) {
  Rng rng(seed);
  const int k = rng.uniform_int(0, 1) ? 2 : 3;
  nn::GridShape shape{2 + rng.uniform_int(0, 3), 2 + rng.uniform_int(0, 3),
                      1 + rng.uniform_int(0, 2)};
  const int cout = 1 + rng.uniform_int(0, 2);
  nn::Conv2d<double> conv("c", k, k, static_cast<int>(shape.c), cout);
  conv.init(rng);
  nn::Batch<double> x{random_matrix(rng, shape.rows(), shape.c)};
  nn::Batch<double> proj{random_matrix(rng, shape.rows(), cout)};
  const auto loss = [&] { return projected_sum(conv.forward(x, shape), proj); };
  loss();
  for (auto* p : conv.params()) p->zero_grad();
  const auto dx = conv.backward(proj);
  double worst = 0.0;
  for (auto* p : conv.params())
    worst = std::max(worst, oracle::fd_check_matrix(loss, p->value, p->grad));
  worst = std::max(worst, oracle::fd_check_matrix(loss, x[0], dx[0]));
  return worst;
}

double check_maxpool(std::uint64_t seed) {
  Rng rng(seed);
  nn::GridShape shape{2 + rng.uniform_int(0, 3), 3 + rng.uniform_int(0, 4),
                      1 + rng.uniform_int(0, 1)};
  nn::MaxPool2d<double> pool(3, 3, rng.uniform_int(0, 1) ? 2 : 1, 2);
  // well-separated levels keep FD probes away from argmax ties
  Md x(shape.rows(), shape.c);
  std::vector<double> levels(static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = static_cast<double>(i) * 0.01;
  rng.shuffle(levels);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = levels[static_cast<std::size_t>(i)];
  nn::Batch<double> xb{x};
  const auto out = pool.out_shape(shape);
  nn::Batch<double> proj{random_matrix(rng, out.rows(), shape.c)};
  const auto loss = [&] { return projected_sum(pool.forward(xb, shape), proj); };
  loss();
  const auto dx = pool.backward(proj);
  return oracle::fd_check_matrix(loss, xb[0], dx[0], 1e-6);
}

double check_batchnorm(std::uint64_t seed) {
  Rng rng(seed);
  const int channels = 1 + rng.uniform_int(0, 3);
  nn::BatchNorm<double> bn("bn", channels);
  nn::Batch<double> x{random_matrix(rng, 4 + rng.uniform_int(0, 6), channels),
                      random_matrix(rng, 4 + rng.uniform_int(0, 6), channels)};
  nn::Batch<double> proj{random_matrix(rng, x[0].rows(), channels),
                         random_matrix(rng, x[1].rows(), channels)};
  const auto loss = [&] { return projected_sum(bn.forward(x, nn::Mode::train), proj); };
  loss();
  for (auto* p : bn.params()) p->zero_grad();
  const auto dx = bn.backward(proj);
  double worst = 0.0;
  for (auto* p : bn.params())
    worst = std::max(worst, oracle::fd_check_matrix(loss, p->value, p->grad));
  worst = std::max(worst, oracle::fd_check_matrix(loss, x[0], dx[0]));
  worst = std::max(worst, oracle::fd_check_matrix(loss, x[1], dx[1]));
  return worst;
}

double check_dropout_off(std::uint64_t seed) {
  Rng rng(seed);
  nn::Dropout<double> drop(0.0, 7);
  nn::Batch<double> x{random_matrix(rng, 5, 4)};
  nn::Batch<double> proj{random_matrix(rng, 5, 4)};
  const auto loss = [&] {
    return projected_sum(drop.forward(x, nn::Mode::train, seed), proj);
  };
  loss();
  const auto dx = drop.backward(proj);
  return oracle::fd_check_matrix(loss, x[0], dx[0]);
}

double check_lstm(std::uint64_t seed) {
  Rng rng(seed);
  const int d = 1 + rng.uniform_int(0, 3), h = 1 + rng.uniform_int(0, 3);
  nn::Lstm<double> lstm("l", d, h);
  lstm.init(rng);
  nn::Batch<double> x{random_matrix(rng, 2 + rng.uniform_int(0, 4), d)};
  nn::Batch<double> proj{random_matrix(rng, x[0].rows(), h)};
  const auto loss = [&] { return projected_sum(lstm.forward(x), proj); };
  loss();
  for (auto* p : lstm.params()) p->zero_grad();
  const auto dx = lstm.backward(proj);
  double worst = 0.0;
  for (auto* p : lstm.params())
    worst = std::max(worst, oracle::fd_check_matrix(loss, p->value, p->grad));
  worst = std::max(worst, oracle::fd_check_matrix(loss, x[0], dx[0]));
  return worst;
}

double check_dense(std::uint64_t seed) {
  Rng rng(seed);
  const auto act = static_cast<nn::Activation>(rng.uniform_int(0, 2));
  const int in = 1 + rng.uniform_int(0, 4), out = 1 + rng.uniform_int(0, 4);
  nn::Dense<double> dense("d", in, out, act);
  dense.init(rng);
  nn::Batch<double> x{random_matrix(rng, 3 + rng.uniform_int(0, 4), in)};
  nn::Batch<double> proj{random_matrix(rng, x[0].rows(), out)};
  const auto loss = [&] { return projected_sum(dense.forward(x), proj); };
  loss();
  for (auto* p : dense.params()) p->zero_grad();
  const auto dx = dense.backward(proj);
  double worst = 0.0;
  for (auto* p : dense.params())
    worst = std::max(worst, oracle::fd_check_matrix(loss, p->value, p->grad));
  worst = std::max(worst, oracle::fd_check_matrix(loss, x[0], dx[0]));
  return worst;
}

double check_sigmoid_bce(std::uint64_t seed) {
  Rng rng(seed);
  const int in = 2 + rng.uniform_int(0, 3), out = 1 + rng.uniform_int(0, 3);
  nn::Dense<double> dense("d", in, out, nn::Activation::sigmoid);
  dense.init(rng);
  nn::Batch<double> x{random_matrix(rng, 4, in)};
  nn::Batch<double> target{Md(4, out)};
  for (Eigen::Index k = 0; k < target[0].size(); ++k)
    target[0].data()[k] = rng.uniform() < 0.4 ? 1.0 : 0.0;
  const auto loss = [&] {
    return static_cast<double>(nn::BceLoss<double>::value(dense.forward(x), target));
  };
  const auto pred = dense.forward(x);
  for (auto* p : dense.params()) p->zero_grad();
  const auto dx = dense.backward(nn::BceLoss<double>::grad(pred, target));
  double worst = 0.0;
  for (auto* p : dense.params())
    worst = std::max(worst, oracle::fd_check_matrix(loss, p->value, p->grad));
  worst = std::max(worst, oracle::fd_check_matrix(loss, x[0], dx[0]));
  return worst;
}

Outcome criterion1() {
  Outcome outcome;
  const double tolerance = 1e-4;
  const int seeds = 20;
  std::map<std::string, std::function<double(std::uint64_t)>> layers{
      {"conv2d", check_conv},         {"maxpool2d", check_maxpool},
      {"batchnorm", check_batchnorm}, {"dropout-off", check_dropout_off},
      {"lstm", check_lstm},           {"dense", check_dense},
      {"sigmoid+bce", check_sigmoid_bce}};
  double worst_overall = 0.0;
  for (const auto& [name, fn] : layers) {
    double worst = 0.0;
    for (int s = 1; s <= seeds; ++s) worst = std::max(worst, fn(static_cast<std::uint64_t>(s)));
    outcome.require(worst < tolerance, name + " max rel err " + std::to_string(worst));
    worst_overall = std::max(worst_overall, worst);
  }
  double composed_worst = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    const auto report = nn::run_reduced_gradient_check(static_cast<std::uint64_t>(s));
    composed_worst = std::max(composed_worst, report.max_rel_error);
    outcome.require(report.passed, "composed net seed " + std::to_string(s) + " err " +
                                       std::to_string(report.max_rel_error));
  }
  worst_overall = std::max(worst_overall, composed_worst);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "7 layers + composed net, %d seeds each, max rel err %.2e",
                seeds, worst_overall);
  if (outcome.detail.empty()) outcome.detail = buf;
  return outcome;
}

// ---------------------------------------------------------------------------
// criterion 2: segment metric oracle equivalence, 200 random pairs

Outcome criterion2() {
  Outcome outcome;
  Rng rng(20260808);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_classes = 1 + rng.uniform_int(0, 4);
    const double duration = rng.uniform(3.0, 30.0);
    const auto ref = oracle::random_events(rng, 14, n_classes, duration);
    const auto pred = oracle::random_events(rng, 14, n_classes, duration);
    const auto got = eval::segment_metrics(ref, pred, n_classes, duration);
    const auto want = oracle::brute_force_segment_totals(ref, pred, duration, 1.0);

    const bool counts_equal = got.counts.nref == want.nref && got.counts.tp == want.tp &&
                              got.counts.fp == want.fp && got.counts.fn == want.fn &&
                              got.counts.substitutions == want.subs &&
                              got.counts.deletions == want.dels &&
                              got.counts.insertions == want.ins;
    outcome.require(counts_equal, "count mismatch at trial " + std::to_string(trial));
    if (want.nref > 0) {
      const double er = static_cast<double>(want.subs + want.dels + want.ins) / want.nref;
      const double f1 = 2 * want.tp + want.fp + want.fn > 0
                            ? 2.0 * want.tp / static_cast<double>(2 * want.tp + want.fp + want.fn)
                            : 1.0;
      const double precision =
          want.tp + want.fp > 0 ? static_cast<double>(want.tp) / (want.tp + want.fp) : 0.0;
      const double recall = static_cast<double>(want.tp) / want.nref;
      outcome.require(got.er == er && got.f1 == f1 && got.recall == recall &&
                          (want.tp + want.fp == 0 || got.precision == precision),
                      "derived metric mismatch at trial " + std::to_string(trial));
    }
  }

  // hand-checked fixtures
  std::vector<eval::Event> ref{{0.5, 2.5, 0}, {4.0, 9.0, 1}};
  const auto perfect = eval::segment_metrics(ref, ref, 2, 30.0);
  outcome.require(perfect.er == 0.0 && perfect.f1 == 1.0, "perfect-match fixture");
  std::vector<eval::Event> ten_segments{{0.0, 10.0, 0}};
  const auto deletions = eval::segment_metrics(ten_segments, {}, 1, 30.0);
  outcome.require(deletions.er == 1.0 && deletions.f1 == 0.0 && deletions.counts.deletions == 10,
                  "all-deletion fixture");
  if (outcome.detail.empty()) outcome.detail = "200 random pairs + 2 fixtures, exact equality";
  return outcome;
}

// ---------------------------------------------------------------------------
// criterion 3: synthesis invariants on a 50-scene seeded desk-scale dataset

Outcome criterion3(const std::string& work) {
  Outcome outcome;
  synth::ProcCorpusParams corpus_params;
  corpus_params.n_scenes = 3;
  corpus_params.n_events = 6;
  corpus_params.locations_per_scene = 2;
  corpus_params.sources_per_event = 3;
  corpus_params.background_duration_s = 6.0;
  corpus_params.seed = 5;
  const auto raw = synth::generate_procedural_corpus(corpus_params, work + "/raw");
  pipeline::cmd_prepare_corpus(raw.event_manifest_path, work + "/corpus");

  auto config = pipeline::ExperimentConfig::desk_scale();
  config.seed = 808;
  config.ontology_path = raw.ontology_path;
  config.corpus_index_path = work + "/corpus/corpus_index.tsv";
  config.backgrounds_path = raw.background_manifest_path;
  config.scenes_per_background = 9;  // 6 backgrounds x 9 = 54 base scenes
  config.pitch_augment = false;
  pipeline::cmd_synthesize(config, work + "/dataset");

  const auto dataset = pipeline::load_dataset(work + "/dataset");
  outcome.require(dataset.recordings.size() >= 50,
                  "expected >= 50 scenes, got " + std::to_string(dataset.recordings.size()));
  const auto ontology = synth::load_ontology(config.ontology_path);
  const auto corpus = synth::load_corpus(config.corpus_index_path);
  const double frame_s = 512.0 / 22050.0;

  struct RecordingCheck {
    bool compatible = true;
    bool polyphony_ok = true;
    int events = 0;
    double snr_err = 0.0;
    double offset_err = 0.0;
  };
  std::vector<RecordingCheck> checks(dataset.recordings.size());
  const auto backgrounds = synth::read_background_manifest(config.backgrounds_path);
  nn::parallel_for_items(dataset.recordings.size(), [&](std::size_t r) {
    const auto& rec = dataset.recordings[r];
    auto& result = checks[r];
    const auto track = synth::read_annotation(dataset.absolute(rec.annotation));
    std::vector<std::pair<double, double>> intervals;
    for (const auto& e : track.events) {
      result.compatible = result.compatible && ontology.is_compatible(rec.scene_class, e.label);
      intervals.emplace_back(e.onset_s, e.offset_s);
    }
    result.polyphony_ok = oracle::max_concurrency(intervals) <= config.synth.polyphony_max;

    // realized SNR and offsets, re-derived from the stored plan
    const auto plan_json = pipeline::read_json_file(dataset.absolute(rec.plan));
    const auto plan = synth::plan_from_json(plan_json);
    std::string bg_path;
    for (const auto& b : backgrounds)
      if (b.location_id == rec.location_id) bg_path = b.path;
    const auto bg = audio::read_wav(bg_path);
    audio::AudioClip bg_stem;
    bg_stem.sample_rate = config.synth.sample_rate;
    const auto scene_len = static_cast<std::size_t>(
        std::llround(config.synth.scene_duration_s * config.synth.sample_rate));
    bg_stem.samples.assign(bg.samples.begin(),
                           bg.samples.begin() + static_cast<std::ptrdiff_t>(scene_len));
    bg_stem = audio::apply_gain(bg_stem, config.synth.background_attenuation_db);

    const auto& realized = plan_json.at("realized");
    for (std::size_t i = 0; i < plan.placements.size(); ++i) {
      const auto& p = plan.placements[i];
      auto stem = corpus.entry(p.corpus_entry).clip;
      stem = audio::time_stretch(audio::pitch_shift(stem, p.pitch_semitones), p.stretch_ratio);
      stem = audio::apply_gain(stem, realized.at(i).at("gain_db").get<double>());
      const auto begin =
          static_cast<std::size_t>(std::llround(p.onset_s * config.synth.sample_rate));
      const double snr =
          20.0 * std::log10(oracle::rms_of(stem.samples, 0, stem.samples.size()) /
                            oracle::rms_of(bg_stem.samples, begin, begin + stem.samples.size()));
      result.snr_err = std::max(result.snr_err, std::fabs(snr - p.snr_db));

      const double planned_offset = p.onset_s + p.est_duration_s;
      const double annotated_offset = realized.at(i).at("onset_s").get<double>() +
                                      realized.at(i).at("duration_s").get<double>();
      result.offset_err =
          std::max(result.offset_err, std::fabs(annotated_offset - planned_offset));
      ++result.events;
    }
  });

  int events_checked = 0;
  double worst_snr_err = 0.0, worst_offset_err = 0.0;
  for (std::size_t r = 0; r < checks.size(); ++r) {
    outcome.require(checks[r].compatible, dataset.recordings[r].id + ": incompatible event");
    outcome.require(checks[r].polyphony_ok,
                    dataset.recordings[r].id + ": polyphony cap exceeded");
    events_checked += checks[r].events;
    worst_snr_err = std::max(worst_snr_err, checks[r].snr_err);
    worst_offset_err = std::max(worst_offset_err, checks[r].offset_err);
  }
  outcome.require(worst_snr_err <= 0.5,
                  "worst realized SNR error " + std::to_string(worst_snr_err) + " dB");
  outcome.require(worst_offset_err <= frame_s,
                  "worst offset error " + std::to_string(worst_offset_err) + " s");

  // byte-identical rerun
  pipeline::cmd_synthesize(config, work + "/dataset_rerun");
  outcome.require(slurp(pipeline::manifest_path(work + "/dataset")) ==
                      slurp(pipeline::manifest_path(work + "/dataset_rerun")),
                  "rerun manifest differs");
  const auto& probe = dataset.recordings.front();
  outcome.require(slurp(dataset.absolute(probe.wav)) ==
                      slurp(work + "/dataset_rerun/" + probe.wav),
                  "rerun audio differs");

  if (outcome.detail.empty()) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%zu scenes, %d events: polyphony<=3, compatible labels, SNR err %.3f dB, "
                  "offset err %.4f s, rerun identical",
                  dataset.recordings.size(), events_checked, worst_snr_err, worst_offset_err);
    outcome.detail = buf;
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// criterion 4: feature contracts

Outcome criterion4(const std::string& work) {
  Outcome outcome;

  // 30 s at 22050, hop 512 -> exactly 1292 frames
  auto tone = oracle::make_sine(1000.0, 22050, 30.0, 0.4);
  const audio::AudioClip clip(tone, 22050);
  const auto mag = features::stft_magnitude(clip, 2048, 512);
  outcome.require(mag.rows() == 1292, "frame count " + std::to_string(mag.rows()));

  // 1 kHz tone lands in the analytically predicted mel band
  const auto lm = features::log_mel(clip, 128, 2048, 512);
  const int n_mels = 128;
  const double mel_max = features::hz_to_mel(11025.0);
  int predicted = 0;
  double best = -1.0;
  for (int b = 0; b < n_mels; ++b) {
    const double lo = features::mel_to_hz(mel_max * b / (n_mels + 1));
    const double center = features::mel_to_hz(mel_max * (b + 1) / (n_mels + 1));
    const double hi = features::mel_to_hz(mel_max * (b + 2) / (n_mels + 1));
    double w = 0.0;
    if (1000.0 > lo && 1000.0 < center) w = (1000.0 - lo) / (center - lo);
    if (1000.0 >= center && 1000.0 < hi) w = (hi - 1000.0) / (hi - center);
    w *= 2.0 / (hi - lo);
    if (w > best) {
      best = w;
      predicted = b;
    }
  }
  Eigen::Index argmax = 0;
  lm.row(lm.rows() / 2).maxCoeff(&argmax);
  outcome.require(static_cast<int>(argmax) == predicted,
                  "tone band " + std::to_string(argmax) + " != " + std::to_string(predicted));

  // LabelMatrix row sums on a crowded annotation
  const auto ontology = synth::dcase2013_ontology();
  synth::AnnotationTrack track;
  track.scene_label = "park";
  track.duration_s = 30.0;
  track.events.push_back({1.0, 4.0, "birdsong"});
  track.events.push_back({2.0, 5.0, "wind"});
  track.events.push_back({2.5, 3.5, "speech"});
  track.events.push_back({10.0, 11.0, "lake"});
  const auto labels = features::labels_from_annotation(track, 1292, 512.0 / 22050.0, ontology);
  for (Eigen::Index f = 0; f < labels.frames(); ++f) {
    int scene_sum = 0, event_sum = 0;
    for (int c = 0; c < labels.n_scenes; ++c) scene_sum += labels.values(f, c);
    for (int c = labels.n_scenes; c < labels.cols(); ++c) event_sum += labels.values(f, c);
    if (scene_sum != 1 || event_sum > 3) {
      outcome.require(false, "row sums violated at frame " + std::to_string(f));
      break;
    }
  }

  // standardizer leakage: perturbing held-out audio leaves fold stats alone
  synth::ProcCorpusParams corpus_params;
  corpus_params.n_scenes = 2;
  corpus_params.n_events = 2;
  corpus_params.locations_per_scene = 2;
  corpus_params.sources_per_event = 1;
  corpus_params.background_duration_s = 2.0;
  corpus_params.event_min_duration_s = 0.15;
  corpus_params.event_max_duration_s = 0.25;
  corpus_params.seed = 17;
  const auto raw = synth::generate_procedural_corpus(corpus_params, work + "/raw");
  pipeline::cmd_prepare_corpus(raw.event_manifest_path, work + "/corpus");
  auto config = pipeline::ExperimentConfig::desk_scale();
  config.seed = 4;
  config.ontology_path = raw.ontology_path;
  config.corpus_index_path = work + "/corpus/corpus_index.tsv";
  config.backgrounds_path = raw.background_manifest_path;
  config.synth.scene_duration_s = 1.5;
  config.scenes_per_background = 1;
  config.pitch_augment = false;
  config.k_folds = 2;
  config.feature_params.n_mels = 16;
  pipeline::cmd_synthesize(config, work + "/dataset");
  pipeline::cmd_make_folds(work + "/dataset", 2, config.seed, 0.25, work + "/folds.json");
  pipeline::cmd_featurize(work + "/dataset", work + "/folds.json", work + "/features",
                          config.feature_params, config.ontology_path);

  const auto folds = features::folds_from_json(pipeline::read_json_file(work + "/folds.json"));
  const std::string held_out = folds[0].test.front();
  fs::copy(work + "/dataset", work + "/dataset_perturbed", fs::copy_options::recursive);
  auto perturbed = audio::read_wav(work + "/dataset_perturbed/audio/" + held_out + ".wav");
  for (auto& s : perturbed.samples) s *= 0.3;
  audio::write_wav(work + "/dataset_perturbed/audio/" + held_out + ".wav", perturbed,
                   audio::WavFormat::float32);
  pipeline::cmd_featurize(work + "/dataset_perturbed", work + "/folds.json",
                          work + "/features_perturbed", config.feature_params,
                          config.ontology_path, /*allow_stale=*/true);
  outcome.require(slurp(work + "/features/fold0_stats.json") ==
                      slurp(work + "/features_perturbed/fold0_stats.json"),
                  "train statistics changed when held-out audio was perturbed");

  if (outcome.detail.empty())
    outcome.detail = "1292 frames, tone band match, row sums, leakage test";
  return outcome;
}

// ---------------------------------------------------------------------------
// criterion 5: overfit sanity

Outcome criterion5(const std::string& work) {
  Outcome outcome;
  synth::ProcCorpusParams corpus_params;
  corpus_params.n_scenes = 2;
  corpus_params.n_events = 3;
  corpus_params.locations_per_scene = 1;
  corpus_params.sources_per_event = 2;
  corpus_params.background_duration_s = 6.0;
  corpus_params.seed = 77;
  const auto raw = synth::generate_procedural_corpus(corpus_params, work + "/raw");
  pipeline::cmd_prepare_corpus(raw.event_manifest_path, work + "/corpus");

  auto config = pipeline::ExperimentConfig::desk_scale();
  config.seed = 99;
  config.ontology_path = raw.ontology_path;
  config.corpus_index_path = work + "/corpus/corpus_index.tsv";
  config.backgrounds_path = raw.background_manifest_path;
  config.scenes_per_background = 1;
  config.pitch_augment = false;
  pipeline::cmd_synthesize(config, work + "/dataset");  // 2 recordings, 5 s each

  const auto dataset = pipeline::load_dataset(work + "/dataset");
  const auto ontology = synth::load_ontology(config.ontology_path);

  const auto run_once = [&]() {
    std::vector<nn::Example<float>> examples;
    for (const auto& rec : dataset.recordings) {
      const auto tensor = features::extract_features(
          audio::read_wav(dataset.absolute(rec.wav)), config.feature_params);
      const auto track = synth::read_annotation(dataset.absolute(rec.annotation));
      const auto labels = features::labels_from_annotation(
          track, tensor.frames(), config.feature_params.frame_hop_s(), ontology);
      // standardize on the pair itself (the training set here)
      nn::Example<float> e;
      e.id = rec.id;
      e.frames = tensor.frames();
      e.target = nn::label_target<float>(labels, nn::Task::joint);
      examples.push_back(std::move(e));
    }
    std::vector<features::FeatureTensor> tensors;
    for (const auto& rec : dataset.recordings)
      tensors.push_back(features::extract_features(audio::read_wav(dataset.absolute(rec.wav)),
                                                   config.feature_params));
    std::vector<const features::FeatureTensor*> ptrs;
    for (const auto& t : tensors) ptrs.push_back(&t);
    const auto stats = features::fit_standardizer(ptrs);
    for (std::size_t i = 0; i < examples.size(); ++i)
      examples[i].input =
          nn::feature_input<float>(features::apply_standardizer(tensors[i], stats));

    const int outputs =
        nn::task_output_units(nn::Task::joint, static_cast<int>(ontology.scene_classes.size()),
                              static_cast<int>(ontology.event_classes.size()));
    // memorization sanity check: regularization off, overfit learning rate
    auto net_config = config.network_config(config.feature_params.n_mels, outputs);
    for (auto& b : net_config.blocks) b.dropout = 0.0;
    net_config.dropout_hidden = 0.0;
    nn::Crnn<float> net(net_config, derive_seed(config.seed, 1));
    nn::TrainOptions options;
    options.max_epochs = 200;
    options.batch_size = 2;  // both recordings in every step
    options.learning_rate = 0.002;
    options.patience = 200;  // run the full budget; the target is memorization
    options.seed = config.seed;
    const auto result = nn::train_network(net, examples, examples, options);
    return std::make_pair(result.best_val_loss, result.history.size());
  };

  const auto [loss_a, epochs_a] = run_once();
  outcome.require(loss_a < 0.01,
                  "training loss " + std::to_string(loss_a) + " after 200 epochs");
  const auto [loss_b, epochs_b] = run_once();
  outcome.require(loss_a == loss_b && epochs_a == epochs_b,
                  "rerun diverged: " + std::to_string(loss_a) + " vs " + std::to_string(loss_b));
  if (outcome.detail.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "2 recordings memorized to loss %.5f, rerun identical",
                  loss_a);
    outcome.detail = buf;
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// criterion 6: desk-scale end-to-end trend

Outcome criterion6(const std::string& work) {
  Outcome outcome;
  synth::ProcCorpusParams corpus_params;  // 3 scenes, 6 events
  corpus_params.seed = 11;
  const auto raw = synth::generate_procedural_corpus(corpus_params, work + "/raw");
  pipeline::cmd_prepare_corpus(raw.event_manifest_path, work + "/corpus");

  auto config = pipeline::ExperimentConfig::desk_scale();  // 5 s scenes, 3 folds
  config.seed = 2026;
  config.ontology_path = raw.ontology_path;
  config.corpus_index_path = work + "/corpus/corpus_index.tsv";
  config.backgrounds_path = raw.background_manifest_path;
  pipeline::cmd_synthesize(config, work + "/dataset");  // 18 bg x 4 x 3 = 216 recordings
  pipeline::cmd_make_folds(work + "/dataset", config.k_folds, config.seed,
                           config.validation_fraction, work + "/folds.json");
  pipeline::cmd_featurize(work + "/dataset", work + "/folds.json", work + "/features",
                          config.feature_params, config.ontology_path);

  std::vector<double> joint_acc, joint_f1, asc_acc;
  for (int fold = 0; fold < config.k_folds; ++fold) {
    for (const auto task : {nn::Task::joint, nn::Task::asc}) {
      const auto trained = pipeline::cmd_train(config, work + "/features", work + "/folds.json",
                                               fold, task, work + "/runs");
      const auto result = pipeline::cmd_evaluate(
          trained.checkpoint_path, work + "/features", work + "/dataset", work + "/folds.json",
          fold, task, config.threshold, work + "/runs", false, false);
      if (task == nn::Task::joint) {
        joint_acc.push_back(*result.asc_accuracy);
        joint_f1.push_back(result.sed->f1);
      } else {
        asc_acc.push_back(*result.asc_accuracy);
      }
    }
  }
  const double joint_acc_mean = eval::cross_fold_stat(joint_acc).mean;
  const double joint_f1_mean = eval::cross_fold_stat(joint_f1).mean;
  const double asc_acc_mean = eval::cross_fold_stat(asc_acc).mean;
  const double silent_baseline_f1 = 0.0;  // empty predictions: TP = 0

  outcome.require(joint_acc_mean >= 0.90,
                  "joint ASC accuracy " + std::to_string(joint_acc_mean));
  outcome.require(joint_f1_mean >= silent_baseline_f1 + 0.25,
                  "joint SED F1 " + std::to_string(joint_f1_mean));
  outcome.require(std::fabs(asc_acc_mean - joint_acc_mean) <= 0.05,
                  "separate-vs-joint ASC gap " +
                      std::to_string(std::fabs(asc_acc_mean - joint_acc_mean)));
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "216 recordings, 3 folds: joint ASC %.3f, separate ASC %.3f, joint SED F1 "
                "%.1f%% (silent baseline %.0f%%)",
                joint_acc_mean, asc_acc_mean, 100.0 * joint_f1_mean, 100.0 * silent_baseline_f1);
  if (outcome.detail.empty()) outcome.detail = buf;
  return outcome;
}

// ---------------------------------------------------------------------------
// criterion 7: compare determinism

Outcome criterion7(const std::string& work) {
  Outcome outcome;
  synth::ProcCorpusParams corpus_params;
  corpus_params.n_scenes = 2;
  corpus_params.n_events = 3;
  corpus_params.locations_per_scene = 2;
  corpus_params.sources_per_event = 2;
  corpus_params.background_duration_s = 2.5;
  corpus_params.event_min_duration_s = 0.15;
  corpus_params.event_max_duration_s = 0.3;
  corpus_params.seed = 23;
  const auto raw = synth::generate_procedural_corpus(corpus_params, work + "/raw");
  pipeline::cmd_prepare_corpus(raw.event_manifest_path, work + "/corpus");

  auto config = pipeline::ExperimentConfig::desk_scale();
  config.seed = 555;
  config.ontology_path = raw.ontology_path;
  config.corpus_index_path = work + "/corpus/corpus_index.tsv";
  config.backgrounds_path = raw.background_manifest_path;
  config.synth.scene_duration_s = 2.0;
  config.scenes_per_background = 2;
  config.k_folds = 2;
  config.validation_fraction = 0.25;
  config.feature_params.n_mels = 16;
  config.conv_filters1 = 8;
  config.conv_filters2 = 8;
  config.conv_filters3 = 16;
  config.lstm_units = 16;
  config.dense_units = 16;
  config.epochs = 3;
  config.batch_size = 4;

  const auto run = [&](const std::string& dir) {
    pipeline::cmd_synthesize(config, dir + "/dataset");
    pipeline::cmd_make_folds(dir + "/dataset", config.k_folds, config.seed,
                             config.validation_fraction, dir + "/folds.json");
    pipeline::cmd_featurize(dir + "/dataset", dir + "/folds.json", dir + "/features",
                            config.feature_params, config.ontology_path);
    pipeline::cmd_compare(config, dir + "/dataset", dir + "/features", dir + "/folds.json",
                          dir + "/out");
  };
  run(work + "/a");
  run(work + "/b");

  const auto compare_file = [&](const std::string& rel) {
    std::string a = slurp(work + "/a/" + rel);
    std::string b = slurp(work + "/b/" + rel);
    // manifests embed their own directory-independent hashes; paths inside
    // the files are relative, so the bytes must match exactly
    outcome.require(a == b, rel + " differs between reruns");
  };
  compare_file("dataset/manifest.json");
  compare_file("features/manifest.json");
  compare_file("folds.json");
  compare_file("out/comparison.json");
  compare_file("out/comparison.txt");
  for (int fold = 0; fold < config.k_folds; ++fold) {
    for (const char* task : {"joint", "asc", "sed"}) {
      compare_file("out/checkpoint_" + std::string(task) + "_fold" + std::to_string(fold) +
                   ".bin");
      compare_file("out/report_" + std::string(task) + "_fold" + std::to_string(fold) + ".json");
    }
  }
  if (outcome.detail.empty())
    outcome.detail = "manifests, folds, 6 checkpoints and all reports byte-identical";
  return outcome;
}

struct Criterion {
  int number;
  const char* name;
  double budget_s;
  std::function<Outcome(const std::string&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  const std::string work_root = "acceptance_work";
  const std::vector<Criterion> criteria{
      {1, "gradient verification", 120.0, [](const std::string&) { return criterion1(); }},
      {2, "segment metric oracle equivalence", 10.0,
       [](const std::string&) { return criterion2(); }},
      {3, "synthesis invariants", 120.0, criterion3},
      {4, "feature contracts", 30.0, criterion4},
      {5, "overfit sanity", 300.0, criterion5},
      {6, "desk-scale end-to-end trend", 1800.0, criterion6},
      {7, "compare determinism", 1800.0, criterion7},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.number) == selected.end())
      continue;
    const std::string work = work_root + "/c" + std::to_string(c.number);
    fs::remove_all(work);
    fs::create_directories(work);
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.fn(work);
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = seconds_since(start);
    if (elapsed > c.budget_s) {
      outcome.ok = false;
      outcome.detail += " [over budget]";
    }
    std::printf("[%s] criterion %d: %s (%.1f s / %.0f s budget) %s\n",
                outcome.ok ? "PASS" : "FAIL", c.number, c.name, elapsed, c.budget_s,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.ok) ++failures;
  }
  return failures;
}
