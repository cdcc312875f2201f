// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: make-corpus, train, synth, eval, compare.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpvoc/dsp/wav.hpp"
#include "fpvoc/error.hpp"
#include "fpvoc/losses.hpp"
#include "fpvoc/train/config.hpp"
#include "fpvoc/train/corpus.hpp"
#include "fpvoc/train/evaluate.hpp"
#include "fpvoc/train/trainer.hpp"
#include "fpvoc/vocoder.hpp"

namespace fs = std::filesystem;
using namespace fpvoc;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

train::TrainConfig resolve_config(const Common& common) {
  train::TrainConfig cfg;
  if (!common.config_path.empty()) cfg = train::load_config(common.config_path);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    train::set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.seed_set) cfg.seed = common.seed;
  return cfg;
}

void add_common(CLI::App* app, Common& common) {
  app->add_option("-c,--config", common.config_path, "key=value configuration file");
  app->add_option("--set", common.overrides, "override a configuration key (key=value), repeatable");
  app->add_option_function<std::uint64_t>(
      "--seed",
      [&common](const std::uint64_t& s) {
        common.seed = s;
        common.seed_set = true;
      },
      "random seed");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

dsp::MelSpectrogram mel_of(const dsp::Waveform& x, const train::TrainConfig& cfg) {
  return dsp::log_mel(x, train::mel_filterbank(cfg), cfg.stft);
}

// Whole hops only; the vocoder emits frames x hop samples.
dsp::Waveform trim_to_hops(dsp::Waveform x, const train::TrainConfig& cfg) {
  const auto hop = static_cast<std::size_t>(cfg.stft.hop);
  x.samples.resize(x.size() / hop * hop);
  if (x.empty()) throw IoError("input is shorter than one hop");
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpvoc: fixed-point iterative neural vocoder toolkit"};
  app.require_subcommand(1);

  Common common;

  // make-corpus
  auto* mk = app.add_subcommand("make-corpus", "write a deterministic synthetic corpus as WAV files");
  std::string mk_out;
  std::size_t mk_clips = 0;
  mk->add_option("-o,--out", mk_out, "output directory")->required();
  mk->add_option("-n,--clips", mk_clips, "number of clips (default: corpus_clips)");
  add_common(mk, common);

  // train
  auto* tr = app.add_subcommand("train", "train a WaveFit, DDPM or InferGrad model");
  std::string tr_resume, tr_out;
  tr->add_option("--resume", tr_resume, "checkpoint to resume from");
  tr->add_option("-o,--out", tr_out, "output directory (overrides out_dir)");
  add_common(tr, common);

  // synth
  auto* sy = app.add_subcommand("synth", "vocode the log-mel of a reference WAV");
  std::string sy_model, sy_in, sy_out, sy_trace, sy_schedule;
  std::size_t sy_iters = 0;
  sy->add_option("-m,--model", sy_model, "trained checkpoint")->required();
  sy->add_option("-i,--input", sy_in, "reference WAV providing the conditioning")->required();
  sy->add_option("-o,--out", sy_out, "output WAV for y_0")->required();
  sy->add_option("--trace", sy_trace, "directory for y_T..y_0 WAVs and probe.csv");
  sy->add_option("--schedule", sy_schedule, "inference preset for diffusion models");
  sy->add_option("--iterations", sy_iters, "WaveFit iteration count (default: trained T)");
  add_common(sy, common);

  // eval
  auto* ev = app.add_subcommand("eval", "contraction probe of a model over an evaluation set, or of trace WAVs");
  std::string ev_model, ev_traces, ev_ref, ev_out = "-", ev_schedule;
  std::size_t ev_clips = 32;
  ev->add_option("-m,--model", ev_model, "trained checkpoint");
  ev->add_option("--traces", ev_traces, "directory holding y_<t>.wav files");
  ev->add_option("--reference", ev_ref, "reference WAV for --traces");
  ev->add_option("-n,--clips", ev_clips, "evaluation clips");
  ev->add_option("--schedule", ev_schedule, "inference preset for diffusion models");
  ev->add_option("-o,--out", ev_out, "CSV output ('-' for stdout)");
  add_common(ev, common);

  // compare
  auto* cmp = app.add_subcommand("compare", "probe a WaveFit and a DDPM model side by side");
  std::string cmp_wf, cmp_dd, cmp_out = "-", cmp_schedule;
  std::size_t cmp_clips = 32;
  cmp->add_option("--wavefit", cmp_wf, "WaveFit checkpoint")->required();
  cmp->add_option("--ddpm", cmp_dd, "DDPM checkpoint")->required();
  cmp->add_option("-n,--clips", cmp_clips, "evaluation clips");
  cmp->add_option("--schedule", cmp_schedule, "inference preset for the DDPM model");
  cmp->add_option("-o,--out", cmp_out, "CSV output ('-' for stdout)");
  add_common(cmp, common);

  CLI11_PARSE(app, argc, argv);

  try {
    auto emit = [](const std::string& path, const std::string& text) {
      if (path == "-") {
        std::cout << text;
      } else {
        write_text(path, text);
      }
    };

    if (*mk) {
      train::TrainConfig cfg = resolve_config(common);
      if (mk_clips > 0) cfg.corpus_clips = mk_clips;
      cfg.corpus = "synthetic";
      train::validate(cfg);
      train::save_corpus(train::corpus_for(cfg), mk_out);
      std::cerr << "wrote " << cfg.corpus_clips << " clips to " << mk_out << "\n";
    } else if (*tr) {
      train::TrainConfig cfg = resolve_config(common);
      if (!tr_out.empty()) cfg.out_dir = tr_out;
      train::validate(cfg);
      const train::Corpus corpus = train::corpus_for(cfg);
      fs::create_directories(cfg.out_dir);
      write_text(fs::path(cfg.out_dir) / "config.txt", train::format_config(cfg));
      const auto summary = train::run_training(cfg, corpus, tr_resume);
      std::cerr << "trained " << summary.steps << " steps; model in " << summary.checkpoint << "\n";
    } else if (*sy) {
      const train::TrainedModel model = train::load_model(sy_model);
      const dsp::Waveform ref = trim_to_hops(dsp::read_wav(sy_in, model.config.sample_rate), model.config);
      train::SynthOptions opt;
      opt.seed = common.seed_set ? common.seed : model.config.seed;
      opt.schedule = sy_schedule;
      opt.iterations = sy_iters;
      const InferenceTrace trace = train::synthesize(model, mel_of(ref, model.config), opt);
      dsp::write_wav(sy_out, trace.output());
      if (!sy_trace.empty()) {
        fs::create_directories(sy_trace);
        for (std::size_t t = 0; t <= trace.steps(); ++t) {
          dsp::write_wav((fs::path(sy_trace) / ("y_" + std::to_string(t) + ".wav")).string(), trace.at(t));
        }
        write_text(fs::path(sy_trace) / "probe.csv",
                   train::probe_csv(contraction_probe(trace, ref, probe_resolutions())));
      }
    } else if (*ev) {
      if (!ev_traces.empty()) {
        if (ev_ref.empty()) throw ConfigError("--traces needs --reference");
        const dsp::Waveform ref = dsp::read_wav(ev_ref);
        InferenceTrace trace;
        std::size_t T = 0;
        while (fs::exists(fs::path(ev_traces) / ("y_" + std::to_string(T + 1) + ".wav"))) ++T;
        for (std::size_t t = T + 1; t-- > 0;) {
          trace.states.push_back(dsp::read_wav((fs::path(ev_traces) / ("y_" + std::to_string(t) + ".wav")).string()));
        }
        emit(ev_out, train::probe_csv(contraction_probe(trace, ref, probe_resolutions())));
      } else {
        if (ev_model.empty()) throw ConfigError("eval needs --model or --traces");
        const train::TrainedModel model = train::load_model(ev_model);
        train::SynthOptions opt;
        opt.seed = common.seed_set ? common.seed : model.config.seed;
        opt.schedule = ev_schedule;
        const train::Corpus eval = train::eval_corpus(model.config, ev_clips);
        emit(ev_out, train::probe_csv(train::mean_probe(model, eval, opt)));
      }
    } else if (*cmp) {
      const train::TrainedModel wf = train::load_model(cmp_wf);
      const train::TrainedModel dd = train::load_model(cmp_dd);
      train::SynthOptions opt;
      opt.seed = common.seed_set ? common.seed : wf.config.seed;
      const train::Corpus eval = train::eval_corpus(wf.config, cmp_clips);
      const auto a = train::mean_probe(wf, eval, opt);
      opt.schedule = cmp_schedule;
      const auto b = train::mean_probe(dd, eval, opt);
      std::string text = "index,wavefit_t,wavefit_sc,wavefit_mag,ddpm_t,ddpm_sc,ddpm_mag\n";
      char buf[192];
      for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        const ProbeRow ra = i < a.size() ? a[i] : ProbeRow{};
        const ProbeRow rb = i < b.size() ? b[i] : ProbeRow{};
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.9g,%.9g,%zu,%.9g,%.9g\n", i, ra.t, ra.sc, ra.mag, rb.t, rb.sc,
                      rb.mag);
        text += buf;
      }
      emit(cmp_out, text);
    }
  } catch (const std::exception& e) {
    std::cerr << "fpvoc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
