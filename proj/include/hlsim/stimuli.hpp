// Copyright 2026 The hlsim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment stimulus preparation: level measurement and setting, room
// impulse response convolution, synthetic triads, and the per-item pipeline
// that runs every condition and equalises its level to a reference condition.

#ifndef HLSIM_STIMULI_HPP_
#define HLSIM_STIMULI_HPP_

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hlsim/audiogram.hpp"
#include "hlsim/common.hpp"
#include "hlsim/fft.hpp"
#include "hlsim/simulator.hpp"

namespace hlsim {

inline constexpr double kDefaultCalibrationDb = 30.0;
inline constexpr double kLeqFloorDb = -20.0;

// Equivalent continuous level; an all-zero signal reports kLeqFloorDb.
inline double Leq(std::span<const double> signal,
                  double calibration_db = kDefaultCalibrationDb) {
  if (signal.empty()) throw ConfigError("Leq of an empty signal");
  double energy = 0.0;
  for (double v : signal) energy += v * v;
  if (energy == 0.0) return kLeqFloorDb;
  return 10.0 * std::log10(energy / static_cast<double>(signal.size())) +
         calibration_db;
}

inline Samples SetLeq(std::span<const double> signal, double target_db,
                      double calibration_db = kDefaultCalibrationDb) {
  if (signal.empty()) throw ConfigError("SetLeq of an empty signal");
  double energy = 0.0;
  for (double v : signal) energy += v * v;
  if (energy == 0.0) throw ConfigError("cannot set the level of silence");
  const double current =
      10.0 * std::log10(energy / static_cast<double>(signal.size())) +
      calibration_db;
  const double gain = DbToAmplitude(target_db - current);
  Samples out(signal.begin(), signal.end());
  for (double& v : out) v *= gain;
  return out;
}

// Full linear convolution (length n + m - 1) via FFT.
inline Samples ConvolveRir(std::span<const double> signal,
                           std::span<const double> rir) {
  if (signal.empty() || rir.empty()) return {};
  const std::size_t out_len = signal.size() + rir.size() - 1;
  std::size_t n = 2;
  while (n < out_len) n <<= 1;
  RealFft fft(n);
  auto a = fft.Forward(signal);
  const auto b = fft.Forward(rir);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k];
  Samples out = fft.Inverse(a);
  out.resize(out_len);
  return out;
}

inline double MidiToHz(double midi) {
  return 440.0 * std::pow(2.0, (midi - 69.0) / 12.0);
}

// Semitone offsets of each chord relative to the tonic, which is also the top
// note of the first-inversion tonic chord.
struct TriadVoicing {
  std::vector<std::array<int, 3>> chords = {
      {-8, -5, 0},    // I6: E G C
      {-10, -4, -1},  // V+6: D G# B
      {-8, -5, 0},    // I6
  };
};

struct TriadOptions {
  double chord_dur_s = 1.0;
  double sample_rate = 48000.0;
  double decay_s = 0.6;
  double ramp_s = 0.01;
  TriadVoicing voicing;
};

struct TriadResult {
  Samples samples;
  std::size_t dropped_partials = 0;  // partials at or above Nyquist
};

// Additive-synthesis chord progression. Partial h (1-based) of each note has
// amplitude partials[h - 1] and an exponential decay envelope with short
// linear on/off ramps at the chord boundaries.
inline TriadResult GenTriads(int tonic_midi, std::span<const double> partials,
                             const TriadOptions& opt = {}) {
  if (tonic_midi < 0 || tonic_midi > 127) {
    throw ConfigError("tonic must be a MIDI note number in [0, 127]");
  }
  if (!(opt.chord_dur_s > 0.0) || !(opt.sample_rate > 0.0)) {
    throw ConfigError("chord duration and sample rate must be positive");
  }
  const auto chord_len = static_cast<std::size_t>(
      std::llround(opt.chord_dur_s * opt.sample_rate));
  const auto ramp = static_cast<std::size_t>(
      std::llround(opt.ramp_s * opt.sample_rate));
  TriadResult out;
  out.samples.assign(chord_len * opt.voicing.chords.size(), 0.0);
  const double nyquist = opt.sample_rate / 2.0;
  for (std::size_t c = 0; c < opt.voicing.chords.size(); ++c) {
    const std::size_t base = c * chord_len;
    for (int offset : opt.voicing.chords[c]) {
      const double f0 = MidiToHz(tonic_midi + offset);
      for (std::size_t h = 0; h < partials.size(); ++h) {
        const double f = f0 * static_cast<double>(h + 1);
        if (f >= nyquist) {
          ++out.dropped_partials;
          continue;
        }
        if (partials[h] == 0.0) continue;
        const double w = 2.0 * std::numbers::pi * f / opt.sample_rate;
        for (std::size_t i = 0; i < chord_len; ++i) {
          double env = std::exp(-static_cast<double>(i) /
                                (opt.decay_s * opt.sample_rate));
          if (ramp > 0) {
            const std::size_t to_end = chord_len - 1 - i;
            env *= std::min({1.0, static_cast<double>(i) / ramp,
                             static_cast<double>(to_end) / ramp});
          }
          out.samples[base + i] +=
              partials[h] * env * std::sin(w * static_cast<double>(i));
        }
      }
    }
  }
  return out;
}

enum class ConditionMethod { kDtvf, kFbas, kExternal };

struct ConditionSpec {
  std::string label;
  ConditionMethod method = ConditionMethod::kDtvf;
  double alpha = 1.0;
  std::string profile = "70yr";
  // For external conditions: directory holding <item id>.wav files that were
  // processed by another simulator.
  std::string external_dir;
};

inline void ValidateConditions(const std::vector<ConditionSpec>& conditions,
                               const std::string& reference) {
  std::set<std::string> labels;
  bool has_reference = false;
  for (const auto& c : conditions) {
    if (c.label.empty()) throw ConfigError("condition label is empty");
    if (!labels.insert(c.label).second) {
      throw ConfigError("duplicate condition label '" + c.label + "'");
    }
    (void)CompressionHealth{c.alpha};
    has_reference = has_reference || c.label == reference;
  }
  if (!has_reference) {
    throw ConfigError("reference condition '" + reference + "' not listed");
  }
}

struct PreparedCondition {
  Samples signal;
  double leq_db = 0.0;
};

struct StimulusItem {
  std::string id;
  std::string kind = "speech";
  std::string source;
  std::map<std::string, PreparedCondition> prepared;
};

struct PrepareOptions {
  double input_leq_db = 70.0;
  double calibration_db = kDefaultCalibrationDb;
};

class PrepareError : public std::runtime_error {
 public:
  PrepareError(const std::string& item, std::map<std::string, std::string> errors)
      : std::runtime_error(Format(item, errors)), errors_(std::move(errors)) {}
  const std::map<std::string, std::string>& errors() const { return errors_; }

 private:
  static std::string Format(const std::string& item,
                            const std::map<std::string, std::string>& errors) {
    std::string msg = "item '" + item + "' failed:";
    for (const auto& [label, err] : errors) msg += " [" + label + "] " + err;
    return msg;
  }
  std::map<std::string, std::string> errors_;
};

// Produces one condition's output from the level-set source signal.
using ConditionRunner =
    std::function<Samples(const ConditionSpec&, std::span<const double>)>;

// Rescales every prepared condition so its Leq equals the reference's.
inline void NormalizeToReference(StimulusItem& item,
                                 const std::string& reference,
                                 double calibration_db) {
  const auto ref = item.prepared.find(reference);
  if (ref == item.prepared.end()) {
    throw ConfigError("reference condition missing from item " + item.id);
  }
  const double target = Leq(ref->second.signal, calibration_db);
  for (auto& [label, cond] : item.prepared) {
    if (label != reference) {
      cond.signal = SetLeq(cond.signal, target, calibration_db);
    }
    cond.leq_db = Leq(cond.signal, calibration_db);
  }
}

// source -> optional RIR -> set Leq -> each condition -> level-normalise to
// the reference condition. All conditions are attempted before failing so the
// error lists every failing condition.
inline StimulusItem PrepareItem(const std::string& id,
                                std::span<const double> source,
                                const std::vector<ConditionSpec>& conditions,
                                const std::string& reference,
                                std::optional<std::span<const double>> rir,
                                const ConditionRunner& run,
                                const PrepareOptions& opt = {}) {
  ValidateConditions(conditions, reference);
  Samples input = rir ? ConvolveRir(source, *rir)
                      : Samples(source.begin(), source.end());
  input = SetLeq(input, opt.input_leq_db, opt.calibration_db);

  StimulusItem item;
  item.id = id;
  std::map<std::string, std::string> errors;
  for (const auto& cond : conditions) {
    try {
      Samples out = run(cond, input);
      double energy = 0.0;
      for (double v : out) energy += v * v;
      if (out.empty() || energy == 0.0) {
        throw std::runtime_error("condition produced silence");
      }
      item.prepared[cond.label] = PreparedCondition{std::move(out), 0.0};
    } catch (const std::exception& e) {
      errors[cond.label] = e.what();
    }
  }
  if (!errors.empty()) throw PrepareError(id, std::move(errors));
  NormalizeToReference(item, reference, opt.calibration_db);
  return item;
}

// Runner backed by HearingLossSimulator instances, one per (profile, alpha,
// method) combination, created lazily. External conditions are read by
// `load_external(condition, item_id)`.
class SimulatorRunner {
 public:
  using ExternalLoader =
      std::function<Samples(const ConditionSpec&, const std::string& item_id)>;

  SimulatorRunner(SimulatorSettings settings,
                  std::map<std::string, AudiogramProfile> profiles,
                  ExternalLoader load_external = {})
      : settings_(std::move(settings)),
        profiles_(std::move(profiles)),
        load_external_(std::move(load_external)) {}

  ConditionRunner ForItem(const std::string& item_id) {
    return [this, item_id](const ConditionSpec& cond,
                           std::span<const double> input) -> Samples {
      if (cond.method == ConditionMethod::kExternal) {
        if (!load_external_) throw ConfigError("no external loader configured");
        return load_external_(cond, item_id);
      }
      const auto method = cond.method == ConditionMethod::kDtvf
                              ? SynthesisMethod::kDtvf
                              : SynthesisMethod::kFbas;
      return Simulator(cond).Process(input, settings_.bank.sample_rate, method);
    };
  }

 private:
  const HearingLossSimulator& Simulator(const ConditionSpec& cond) {
    const std::string key = cond.profile + "|" + std::to_string(cond.alpha);
    auto it = simulators_.find(key);
    if (it == simulators_.end()) {
      const auto profile = profiles_.find(cond.profile);
      if (profile == profiles_.end()) {
        throw ConfigError("unknown profile '" + cond.profile + "'");
      }
      it = simulators_
               .emplace(key, HearingLossSimulator(settings_, profile->second,
                                                  CompressionHealth{cond.alpha}))
               .first;
    }
    return it->second;
  }

  SimulatorSettings settings_;
  std::map<std::string, AudiogramProfile> profiles_;
  ExternalLoader load_external_;
  std::map<std::string, HearingLossSimulator> simulators_;
};

// Root-mean-square difference of log power spectra (dB) between two signals,
// over Hann-windowed frames, restricted to [f_lo, f_hi]. Exploratory only.
inline double LogSpectralDistance(std::span<const double> a,
                                  std::span<const double> b, double sample_rate,
                                  double f_lo = 125.0, double f_hi = 8000.0,
                                  std::size_t frame = 1024) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < frame) throw ConfigError("signals shorter than one analysis frame");
  RealFft fft(frame);
  const std::vector<double> window = PeriodicHann(frame);
  std::vector<double> fa(frame), fb(frame);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + frame <= n; start += frame / 2) {
    for (std::size_t i = 0; i < frame; ++i) {
      fa[i] = window[i] * a[start + i];
      fb[i] = window[i] * b[start + i];
    }
    const auto sa = fft.Forward(fa);
    const auto sb = fft.Forward(fb);
    for (std::size_t k = 1; k < sa.size(); ++k) {
      const double f = static_cast<double>(k) * sample_rate / frame;
      if (f < f_lo || f > f_hi) continue;
      const double pa = std::norm(sa[k]) + 1e-20;
      const double pb = std::norm(sb[k]) + 1e-20;
      const double d = 10.0 * std::log10(pa / pb);
      acc += d * d;
      ++count;
    }
  }
  return count == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(count));
}

}  // namespace hlsim

#endif  // HLSIM_STIMULI_HPP_
