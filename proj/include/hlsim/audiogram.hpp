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

// Hearing profiles and the split of total hearing loss into an active
// (level-dependent, compressive) part and a passive (constant) part.
//
// All levels in this header are dB HL. The active part is released linearly
// between the absolute threshold and a recruitment ceiling, so quiet sounds
// receive the full hearing loss while loud sounds only see the passive part.

#ifndef HLSIM_AUDIOGRAM_HPP_
#define HLSIM_AUDIOGRAM_HPP_

#include <string>
#include <utility>
#include <vector>

#include "hlsim/common.hpp"

namespace hlsim {

class AudiogramProfile {
 public:
  AudiogramProfile(std::string name, std::vector<double> frequencies_hz,
                   std::vector<double> hearing_level_db)
      : name_(std::move(name)),
        frequencies_(std::move(frequencies_hz)),
        hearing_level_(std::move(hearing_level_db)) {
    if (frequencies_.size() != hearing_level_.size() ||
        frequencies_.size() < 2) {
      throw ConfigError("audiogram needs >= 2 frequencies with one level each");
    }
    if (frequencies_.front() <= 0.0 || !StrictlyIncreasing(frequencies_)) {
      throw ConfigError("audiogram frequencies must be positive and increasing");
    }
    for (double hl : hearing_level_) {
      if (!(hl >= 0.0 && hl <= 120.0)) {
        throw ConfigError("hearing level out of [0, 120] dB HL");
      }
    }
  }

  // Average hearing level of 70-year-old males.
  static AudiogramProfile SeventyYearOld() {
    return AudiogramProfile("70yr", {125, 250, 500, 1000, 2000, 4000, 8000},
                            {8, 8, 9, 10, 19, 43, 59});
  }

  static AudiogramProfile Normal() {
    return AudiogramProfile("normal", {125, 250, 500, 1000, 2000, 4000, 8000},
                            std::vector<double>(7, 0.0));
  }

  const std::string& name() const { return name_; }
  const std::vector<double>& frequencies() const { return frequencies_; }
  const std::vector<double>& hearing_level() const { return hearing_level_; }

 private:
  std::string name_;
  std::vector<double> frequencies_;
  std::vector<double> hearing_level_;
};

class CompressionHealth {
 public:
  explicit CompressionHealth(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw ConfigError("compression health alpha must lie in [0, 1]");
    }
  }
  double value() const { return alpha_; }

 private:
  double alpha_;
};

// Maximum active gain per frequency and the recruitment range.
struct ActiveGainCalibration {
  std::vector<double> frequencies;
  std::vector<double> g_cal;  // active loss at alpha = 0 before capping
  std::vector<double> c_cap;  // kInf = uncapped
  std::vector<double> l_at;   // absolute threshold, dB HL
  double l_ceiling = 100.0;   // active loss vanishes at and above this level
  // Added to calibrated dB SPL frame levels to obtain dB HL.
  std::vector<double> spl_to_hl_offset;

  // Fits the three alpha rows of the 70-yr table exactly.
  static ActiveGainCalibration Default() {
    ActiveGainCalibration cal;
    cal.frequencies = {125, 250, 500, 1000, 2000, 4000, 8000};
    cal.g_cal = {16, 16, 18, 20, 38, 54, 54};
    cal.c_cap = {kInf, kInf, kInf, kInf, kInf, kInf, 44};
    cal.l_at.assign(7, 0.0);
    cal.spl_to_hl_offset.assign(7, 0.0);
    cal.Validate();
    return cal;
  }

  void Validate() const {
    const std::size_t n = frequencies.size();
    if (n < 1 || g_cal.size() != n || c_cap.size() != n || l_at.size() != n) {
      throw ConfigError("calibration vectors must match the frequency grid");
    }
    if (!spl_to_hl_offset.empty() && spl_to_hl_offset.size() != n) {
      throw ConfigError("spl_to_hl_offset must match the frequency grid");
    }
    if (frequencies.front() <= 0.0 || !StrictlyIncreasing(frequencies)) {
      throw ConfigError("calibration frequencies must be positive, increasing");
    }
    double max_at = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(g_cal[i] >= 0.0) || !(c_cap[i] >= 0.0)) {
        throw ConfigError("g_cal and c_cap must be non-negative");
      }
      max_at = std::max(max_at, l_at[i]);
    }
    if (!(l_ceiling > max_at)) {
      throw ConfigError("l_ceiling must exceed every absolute threshold");
    }
  }

  double GainAt(double fc) const {
    return InterpolateLogFrequency(frequencies, g_cal, fc);
  }
  double CapAt(double fc) const {
    return InterpolateLogFrequency(frequencies, c_cap, fc);
  }
  double ThresholdAt(double fc) const {
    return InterpolateLogFrequency(frequencies, l_at, fc);
  }
  double SplToHlAt(double fc) const {
    if (spl_to_hl_offset.empty()) return 0.0;
    return InterpolateLogFrequency(frequencies, spl_to_hl_offset, fc);
  }
};

struct HLDecomposition {
  std::vector<double> frequencies;
  std::vector<double> hl_act;
  std::vector<double> hl_pas;
  CompressionHealth alpha{1.0};

  double ActiveAt(double fc) const {
    return InterpolateLogFrequency(frequencies, hl_act, fc);
  }
  double PassiveAt(double fc) const {
    return InterpolateLogFrequency(frequencies, hl_pas, fc);
  }
};

inline double InterpolateHl(const AudiogramProfile& profile, double fc) {
  return InterpolateLogFrequency(profile.frequencies(),
                                 profile.hearing_level(), fc);
}

inline HLDecomposition DecomposeHl(const AudiogramProfile& profile,
                                   CompressionHealth alpha,
                                   const ActiveGainCalibration& cal) {
  cal.Validate();
  HLDecomposition out;
  out.alpha = alpha;
  out.frequencies = profile.frequencies();
  const std::size_t n = out.frequencies.size();
  out.hl_act.resize(n);
  out.hl_pas.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double fc = out.frequencies[i];
    const double total = profile.hearing_level()[i];
    const double act =
        std::min({total, cal.CapAt(fc), (1.0 - alpha.value()) * cal.GainAt(fc)});
    out.hl_act[i] = std::max(0.0, act);
    out.hl_pas[i] = total - out.hl_act[i];
  }
  return out;
}

inline double ReductionActive(const HLDecomposition& decomp,
                              const ActiveGainCalibration& cal, double fc,
                              double level_hl) {
  const double l_at = cal.ThresholdAt(fc);
  const double fraction = std::clamp(
      (cal.l_ceiling - level_hl) / (cal.l_ceiling - l_at), 0.0, 1.0);
  return decomp.ActiveAt(fc) * fraction;
}

inline double ReductionTotal(const HLDecomposition& decomp,
                             const ActiveGainCalibration& cal, double fc,
                             double level_hl) {
  return ReductionActive(decomp, cal, fc, level_hl) + decomp.PassiveAt(fc);
}

}  // namespace hlsim

#endif  // HLSIM_AUDIOGRAM_HPP_
