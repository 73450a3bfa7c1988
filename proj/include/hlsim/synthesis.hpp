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

// Synthesis back-ends turning a per-channel, per-frame reduction trajectory
// into the simulated output signal.
//
//  * DTVF: one minimum-phase FIR per frame, designed from the frame's channel
//    reductions, applied to the Hann-windowed frame; frames are overlap-added.
//  * FBAS: per-channel gains applied to the analysis channels, which are then
//    advanced by their fixed envelope-peak delay, weighted and summed.

#ifndef HLSIM_SYNTHESIS_HPP_
#define HLSIM_SYNTHESIS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "hlsim/audiogram.hpp"
#include "hlsim/common.hpp"
#include "hlsim/filterbank.hpp"
#include "hlsim/minphase.hpp"

namespace hlsim {

struct GainTrajectory {
  std::vector<double> center_frequencies;
  std::vector<double> frame_times;
  // r_total[channel][frame] in dB, applied as a gain of -r_total.
  std::vector<std::vector<double>> r_total;
  std::size_t hop_samples = 0;
  double sample_rate = 0.0;

  std::size_t frames() const { return frame_times.size(); }

  std::vector<double> FrameTargetDb(std::size_t frame) const {
    std::vector<double> out(center_frequencies.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = -r_total[k][frame];
    return out;
  }
};

struct OlaParams {
  double frame_hop_s = 0.001;
  double frame_len_s = 0.002;
  std::size_t fir_len = 128;
  std::size_t fft_size = 1024;

  std::size_t HopSamples(double fs) const {
    return internal::SecondsToSamples(frame_hop_s, fs);
  }

  void Validate(double fs) const {
    const std::size_t hop = HopSamples(fs);
    const std::size_t len = internal::SecondsToSamples(frame_len_s, fs);
    if (hop == 0) throw ConfigError("frame hop is shorter than one sample");
    if (len != 2 * hop) {
      throw ConfigError("overlap-add needs frame_len = 2 * frame_hop");
    }
    if (!IsPowerOfTwo(fft_size)) {
      throw ConfigError("design FFT size must be a power of two");
    }
    if (fir_len == 0 || fir_len > fft_size) {
      throw ConfigError("fir_len must be in [1, fft_size]");
    }
  }
};

inline GainTrajectory ComputeGainTrajectory(const LevelFrames& levels,
                                            const HLDecomposition& decomp,
                                            const ActiveGainCalibration& cal) {
  if (levels.levels.size() != levels.center_frequencies.size()) {
    throw MismatchError("level matrix does not match the channel grid");
  }
  GainTrajectory out;
  out.center_frequencies = levels.center_frequencies;
  out.frame_times = levels.frame_times;
  out.hop_samples = levels.hop_samples;
  out.sample_rate = levels.sample_rate;
  out.r_total.resize(levels.levels.size());
  for (std::size_t k = 0; k < levels.levels.size(); ++k) {
    const double fc = levels.center_frequencies[k];
    const double offset = cal.SplToHlAt(fc);
    const auto& row = levels.levels[k];
    if (row.size() != levels.frame_times.size()) {
      throw MismatchError("level row length differs from the frame count");
    }
    auto& dst = out.r_total[k];
    dst.resize(row.size());
    for (std::size_t t = 0; t < row.size(); ++t) {
      dst[t] = ReductionTotal(decomp, cal, fc, row[t] + offset);
    }
  }
  return out;
}

namespace internal {

inline void FullConvolveAdd(std::span<const double> x,
                            std::span<const double> h, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < h.size(); ++j) out[i + j] += xi * h[j];
  }
}

}  // namespace internal

// Single static minimum-phase filter designed from one frame of the
// trajectory, applied by direct convolution and truncated to the input
// length. At alpha = 1 every frame is identical and SynthDtvf must match this.
inline Samples StaticMinPhaseFilter(std::span<const double> signal,
                                    const GainTrajectory& trajectory,
                                    std::size_t frame, const OlaParams& ola = {}) {
  MinPhaseDesigner designer(trajectory.center_frequencies, ola.fir_len,
                            ola.fft_size, trajectory.sample_rate);
  const std::vector<double> taps =
      designer.DesignTaps(trajectory.FrameTargetDb(frame));
  std::vector<double> full(signal.size() + taps.size(), 0.0);
  internal::FullConvolveAdd(signal, taps, full);
  full.resize(signal.size());
  return full;
}

// Direct time-varying filtering. Output length equals input length; the
// trailing fir_len - 1 samples of the overlap-add tail are discarded and no
// delay compensation is applied.
inline Samples SynthDtvf(std::span<const double> signal,
                         const GainTrajectory& trajectory,
                         const OlaParams& ola = {}) {
  const double fs = trajectory.sample_rate;
  ola.Validate(fs);
  const std::size_t hop = ola.HopSamples(fs);
  const std::size_t len = 2 * hop;
  if (trajectory.hop_samples != hop) {
    throw MismatchError("trajectory hop differs from the overlap-add hop");
  }
  if (trajectory.r_total.size() != trajectory.center_frequencies.size()) {
    throw MismatchError("trajectory rows do not match its channel grid");
  }
  // A signal shorter than one frame has a single whole-signal level.
  if (len > signal.size() && trajectory.frames() == 1) {
    return StaticMinPhaseFilter(signal, trajectory, 0, ola);
  }
  if (trajectory.frames() != internal::FrameCount(signal.size(), hop)) {
    throw MismatchError("trajectory frame count does not cover the signal");
  }

  MinPhaseDesigner designer(trajectory.center_frequencies, ola.fir_len,
                            ola.fft_size, fs);
  const std::vector<double> window = PeriodicHann(len);
  // acc[i] holds output sample i - hop (the first frame starts at -hop).
  std::vector<double> acc(signal.size() + len + ola.fir_len + hop, 0.0);
  std::vector<double> frame(len);
  std::vector<double> previous_target;
  std::vector<double> taps;
  const std::ptrdiff_t size = static_cast<std::ptrdiff_t>(signal.size());

  for (std::size_t t = 0; t < trajectory.frames(); ++t) {
    const std::ptrdiff_t start =
        static_cast<std::ptrdiff_t>(t * hop) - static_cast<std::ptrdiff_t>(hop);
    bool silent = true;
    for (std::size_t i = 0; i < len; ++i) {
      const std::ptrdiff_t n = start + static_cast<std::ptrdiff_t>(i);
      frame[i] = (n >= 0 && n < size) ? window[i] * signal[n] : 0.0;
      silent = silent && frame[i] == 0.0;
    }
    if (silent) continue;
    std::vector<double> target = trajectory.FrameTargetDb(t);
    if (target != previous_target) {
      taps = designer.DesignTaps(target);
      previous_target = std::move(target);
    }
    internal::FullConvolveAdd(frame, taps, std::span<double>(acc).subspan(t * hop));
  }
  return Samples(acc.begin() + static_cast<std::ptrdiff_t>(hop),
                 acc.begin() + static_cast<std::ptrdiff_t>(hop) + size);
}

namespace internal {

// Gain in dB at sample `n`, linear in dB between frame centres.
inline double TrajectoryDbAt(const std::vector<double>& row, std::size_t hop,
                             std::size_t n) {
  const std::size_t t = n / hop;
  if (t + 1 >= row.size()) return row.back();
  const double frac = static_cast<double>(n - t * hop) / static_cast<double>(hop);
  return row[t] + frac * (row[t + 1] - row[t]);
}

inline void AccumulateFbasChannel(const GammatoneChannel& ch,
                                  std::span<const double> channel,
                                  const std::vector<double>& r_row,
                                  std::size_t hop, std::span<double> out) {
  const std::size_t n = channel.size();
  for (std::size_t i = 0; i + ch.delay < n; ++i) {
    const std::size_t src = i + ch.delay;
    const double gain = DbToAmplitude(-TrajectoryDbAt(r_row, hop, src));
    out[i] += ch.synthesis_weight * gain * channel[src];
  }
}

inline void CheckFbasGrid(const GammatoneFilterbank& bank,
                          const GainTrajectory& trajectory,
                          std::size_t length) {
  if (trajectory.center_frequencies != bank.CenterFrequencies()) {
    throw MismatchError("trajectory channel grid differs from the filterbank");
  }
  if (trajectory.sample_rate != bank.sample_rate()) {
    throw MismatchError("trajectory sample rate differs from the filterbank");
  }
  if (trajectory.hop_samples == 0 ||
      trajectory.frames() < FrameCount(length, trajectory.hop_samples) - 1) {
    throw MismatchError("trajectory frames do not cover the signal");
  }
}

}  // namespace internal

inline Samples SynthFbas(const ChannelSignals& channels,
                         const GainTrajectory& trajectory,
                         const GammatoneFilterbank& bank) {
  const std::size_t length =
      channels.signals.empty() ? 0 : channels.signals.front().size();
  if (channels.center_frequencies != bank.CenterFrequencies()) {
    throw MismatchError("channel signals do not come from this filterbank");
  }
  internal::CheckFbasGrid(bank, trajectory, length);
  Samples out(length, 0.0);
  for (std::size_t k = 0; k < bank.size(); ++k) {
    internal::AccumulateFbasChannel(bank.channels()[k], channels.signals[k],
                                    trajectory.r_total[k],
                                    trajectory.hop_samples, out);
  }
  return out;
}

// Same as SynthFbas(bank.Analyze(signal), ...) without materialising every
// channel.
inline Samples SynthFbasFromSignal(std::span<const double> signal,
                                   const GainTrajectory& trajectory,
                                   const GammatoneFilterbank& bank) {
  internal::CheckFbasGrid(bank, trajectory, signal.size());
  Samples out(signal.size(), 0.0);
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const Samples channel = bank.AnalyzeChannel(k, signal);
    internal::AccumulateFbasChannel(bank.channels()[k], channel,
                                    trajectory.r_total[k],
                                    trajectory.hop_samples, out);
  }
  return out;
}

}  // namespace hlsim

#endif  // HLSIM_SYNTHESIS_HPP_
