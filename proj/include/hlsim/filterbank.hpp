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

// ERB-spaced gammatone analysis filterbank and framewise level estimation.
//
// Each channel is a cascade of `filter_order` identical complex one-pole
// sections, i.e. a sampled gammatone with a complex carrier. The real part of
// the (scaled) complex output is the channel signal. The complex scale factor
// is chosen so that
//   * the real channel filter has exactly 0 dB gain at its centre frequency;
//   * after advancing the channel by its envelope-peak delay, the response at
//     the centre frequency has zero phase.
// The second property is what lets the synthesis side sum delay-compensated
// channels without carrier-phase cancellation between neighbours.

#ifndef HLSIM_FILTERBANK_HPP_
#define HLSIM_FILTERBANK_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "hlsim/common.hpp"

namespace hlsim {

inline double ErbBandwidth(double fc) {
  return 24.7 * (4.37 * fc / 1000.0 + 1.0);
}

inline double ErbNumber(double f) {
  return 21.4 * std::log10(4.37 * f / 1000.0 + 1.0);
}

inline double ErbNumberToHz(double erb_number) {
  return (std::pow(10.0, erb_number / 21.4) - 1.0) * 1000.0 / 4.37;
}

struct FilterbankSpec {
  std::size_t n_channels = 100;
  double f_lo = 100.0;
  double f_hi = 8000.0;
  int filter_order = 4;
  double sample_rate = 48000.0;

  void Validate() const {
    if (n_channels < 2) throw ConfigError("filterbank needs >= 2 channels");
    if (!(f_lo > 0.0 && f_lo < f_hi && f_hi < sample_rate / 2.0)) {
      throw ConfigError("filterbank needs 0 < f_lo < f_hi < sample_rate / 2");
    }
    if (filter_order < 1 || filter_order > 8) {
      throw ConfigError("gammatone order must be in [1, 8]");
    }
  }
};

struct GammatoneChannel {
  double fc = 0.0;
  std::complex<double> pole;
  std::complex<double> scale;  // applied before taking the real part
  std::size_t delay = 0;       // envelope-peak sample of the impulse response
  double synthesis_weight = 1.0;
};

struct ChannelSignals {
  std::vector<double> center_frequencies;
  std::vector<Samples> signals;
  double sample_rate = 0.0;
};

struct LevelFrames {
  std::vector<double> center_frequencies;
  std::vector<double> frame_times;
  // levels[channel][frame], calibrated dB SPL.
  std::vector<std::vector<double>> levels;
  double floor_db = -20.0;
  std::size_t hop_samples = 0;
  double sample_rate = 0.0;
};

struct LevelOptions {
  double frame_hop_s = 0.001;
  double frame_len_s = 0.002;
  double calibration_db = 30.0;  // dB SPL of a digital RMS of 1.0
  double floor_db = -20.0;
};

class GammatoneFilterbank {
 public:
  explicit GammatoneFilterbank(const FilterbankSpec& spec) : spec_(spec) {
    spec_.Validate();
    const double e_lo = ErbNumber(spec_.f_lo);
    const double e_hi = ErbNumber(spec_.f_hi);
    const std::size_t n = spec_.n_channels;
    channels_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      double fc;
      if (k == 0) {
        fc = spec_.f_lo;
      } else if (k + 1 == n) {
        fc = spec_.f_hi;
      } else {
        fc = ErbNumberToHz(e_lo + (e_hi - e_lo) * static_cast<double>(k) /
                                      static_cast<double>(n - 1));
      }
      channels_[k] = DesignChannel(fc);
    }
    FitSynthesisWeights();
  }

  const FilterbankSpec& spec() const { return spec_; }
  double sample_rate() const { return spec_.sample_rate; }
  std::size_t size() const { return channels_.size(); }
  const std::vector<GammatoneChannel>& channels() const { return channels_; }

  std::vector<double> CenterFrequencies() const {
    std::vector<double> out;
    out.reserve(channels_.size());
    for (const auto& ch : channels_) out.push_back(ch.fc);
    return out;
  }

  // Frequency response of the real channel filter (analysis output).
  std::complex<double> ChannelResponse(std::size_t k, double f) const {
    return ChannelResponseOf(channels_[k], f);
  }

  // Response of the full FBAS chain (advance by delay, weight, sum) with all
  // channel gains at 0 dB.
  std::complex<double> SynthesisResponse(double f) const {
    std::complex<double> sum = 0.0;
    const double w = 2.0 * std::numbers::pi * f / spec_.sample_rate;
    for (std::size_t k = 0; k < channels_.size(); ++k) {
      sum += channels_[k].synthesis_weight * ChannelResponse(k, f) *
             std::polar(1.0, w * static_cast<double>(channels_[k].delay));
    }
    return sum;
  }

  // Real output of channel k for `signal`. The complex state is kept
  // internally; output length equals input length.
  Samples AnalyzeChannel(std::size_t k, std::span<const double> signal) const {
    const auto& ch = channels_[k];
    std::vector<std::complex<double>> state(spec_.filter_order, 0.0);
    Samples out(signal.size());
    for (std::size_t n = 0; n < signal.size(); ++n) {
      std::complex<double> v = signal[n];
      for (auto& s : state) {
        s = v + ch.pole * s;
        v = s;
      }
      out[n] = (ch.scale * v).real();
    }
    return out;
  }

  ChannelSignals Analyze(std::span<const double> signal,
                         double signal_rate) const {
    CheckRate(signal_rate);
    ChannelSignals out;
    out.sample_rate = spec_.sample_rate;
    out.center_frequencies = CenterFrequencies();
    out.signals.resize(channels_.size());
    for (std::size_t k = 0; k < channels_.size(); ++k) {
      out.signals[k] = AnalyzeChannel(k, signal);
    }
    return out;
  }

  void CheckRate(double signal_rate) const {
    if (signal_rate != spec_.sample_rate) {
      throw MismatchError("signal sample rate " + std::to_string(signal_rate) +
                          " differs from filterbank rate " +
                          std::to_string(spec_.sample_rate));
    }
  }

 private:
  static std::complex<double> Power(std::complex<double> z, int order) {
    std::complex<double> r = 1.0;
    for (int i = 0; i < order; ++i) r *= z;
    return r;
  }

  // Response of the complex cascade (before scale and real part).
  std::complex<double> ComplexResponse(const GammatoneChannel& ch,
                                       double w) const {
    const std::complex<double> section =
        1.0 / (1.0 - ch.pole * std::polar(1.0, -w));
    return Power(section, spec_.filter_order);
  }

  GammatoneChannel DesignChannel(double fc) const {
    GammatoneChannel ch;
    ch.fc = fc;
    const double fs = spec_.sample_rate;
    const double b = 1.019 * ErbBandwidth(fc);
    ch.pole = std::polar(std::exp(-2.0 * std::numbers::pi * b / fs),
                         2.0 * std::numbers::pi * fc / fs);

    // Envelope of the cascade impulse response is C(n + m - 1, m - 1) r^n,
    // which grows while (n + m) / (n + 1) * r >= 1.
    const double r = std::abs(ch.pole);
    const int m = spec_.filter_order;
    std::size_t peak = 0;
    while (static_cast<double>(peak + m) / static_cast<double>(peak + 1) * r >=
           1.0) {
      ++peak;
    }
    ch.delay = peak;

    const double wc = 2.0 * std::numbers::pi * fc / fs;
    const std::complex<double> aligned =
        ComplexResponse(ch, wc) * std::polar(1.0, wc * static_cast<double>(peak));
    ch.scale = 2.0 * std::conj(aligned) / std::norm(aligned);
    const double gain = std::abs(ChannelResponseOf(ch, fc));
    ch.scale /= gain;
    return ch;
  }

  std::complex<double> ChannelResponseOf(const GammatoneChannel& ch,
                                         double f) const {
    const double w = 2.0 * std::numbers::pi * f / spec_.sample_rate;
    return 0.5 * (ch.scale * ComplexResponse(ch, w) +
                  std::conj(ch.scale * ComplexResponse(ch, -w)));
  }

  // Per-channel weights that flatten the summed response at the centre
  // frequencies (multiplicative fixed-point iteration).
  void FitSynthesisWeights() {
    for (auto& ch : channels_) ch.synthesis_weight = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
      std::vector<double> mags(channels_.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < channels_.size(); ++k) {
        mags[k] = std::abs(SynthesisResponse(channels_[k].fc));
        worst = std::max(worst, std::abs(std::log(mags[k])));
      }
      if (worst < 1e-6) break;
      for (std::size_t k = 0; k < channels_.size(); ++k) {
        channels_[k].synthesis_weight /= std::sqrt(mags[k]);
      }
    }
  }

  FilterbankSpec spec_;
  std::vector<GammatoneChannel> channels_;
};

inline GammatoneFilterbank DesignFilterbank(const FilterbankSpec& spec) {
  return GammatoneFilterbank(spec);
}

namespace internal {

inline std::size_t SecondsToSamples(double seconds, double sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

// Frames centred on 0, hop, 2 hop, ... until every sample is covered by two
// half-overlapping frames.
inline std::size_t FrameCount(std::size_t length, std::size_t hop) {
  return (length + hop - 1) / hop + 1;
}

// Hann-weighted level of every frame of one channel. Frame t is centred on
// sample t * hop; samples outside the signal count as zero.
inline std::vector<double> FrameLevels(std::span<const double> x,
                                       std::size_t hop, std::size_t len,
                                       const LevelOptions& opt) {
  std::vector<double> levels;
  if (len > x.size()) {
    double energy = 0.0;
    for (double v : x) energy += v * v;
    const double ms = x.empty() ? 0.0 : energy / static_cast<double>(x.size());
    const double db = ms > 0.0 ? 10.0 * std::log10(ms) + opt.calibration_db
                               : opt.floor_db;
    levels.push_back(std::max(db, opt.floor_db));
    return levels;
  }
  const std::vector<double> window = PeriodicHann(len);
  double window_sum = 0.0;
  for (double w : window) window_sum += w;
  const std::size_t frames = FrameCount(x.size(), hop);
  levels.resize(frames);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(len / 2);
  const std::ptrdiff_t size = static_cast<std::ptrdiff_t>(x.size());
  for (std::size_t t = 0; t < frames; ++t) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * hop) - half;
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const std::ptrdiff_t n = start + static_cast<std::ptrdiff_t>(i);
      if (n < 0 || n >= size) continue;
      acc += window[i] * x[n] * x[n];
    }
    const double ms = acc / window_sum;
    const double db =
        ms > 0.0 ? 10.0 * std::log10(ms) + opt.calibration_db : opt.floor_db;
    levels[t] = std::max(db, opt.floor_db);
  }
  return levels;
}

inline void CheckLevelOptions(const LevelOptions& opt) {
  if (!(opt.frame_hop_s > 0.0 && opt.frame_len_s >= opt.frame_hop_s)) {
    throw ConfigError("level frames need frame_len >= frame_hop > 0");
  }
}

inline LevelFrames MakeFrameHeader(std::vector<double> fcs, std::size_t length,
                                   double fs, const LevelOptions& opt) {
  LevelFrames out;
  out.center_frequencies = std::move(fcs);
  out.floor_db = opt.floor_db;
  out.sample_rate = fs;
  out.hop_samples = std::max<std::size_t>(1, SecondsToSamples(opt.frame_hop_s, fs));
  const std::size_t len = SecondsToSamples(opt.frame_len_s, fs);
  const std::size_t frames =
      len > length ? 1 : FrameCount(length, out.hop_samples);
  for (std::size_t t = 0; t < frames; ++t) {
    out.frame_times.push_back(static_cast<double>(t * out.hop_samples) / fs);
  }
  return out;
}

}  // namespace internal

inline LevelFrames EstimateLevels(const ChannelSignals& channels,
                                  const LevelOptions& opt = {}) {
  internal::CheckLevelOptions(opt);
  const double fs = channels.sample_rate;
  const std::size_t length =
      channels.signals.empty() ? 0 : channels.signals.front().size();
  for (const auto& s : channels.signals) {
    if (s.size() != length) throw MismatchError("channel lengths differ");
  }
  if (channels.signals.size() != channels.center_frequencies.size()) {
    throw MismatchError("one signal per centre frequency expected");
  }
  LevelFrames out =
      internal::MakeFrameHeader(channels.center_frequencies, length, fs, opt);
  const std::size_t len = internal::SecondsToSamples(opt.frame_len_s, fs);
  for (const auto& s : channels.signals) {
    out.levels.push_back(
        internal::FrameLevels(s, out.hop_samples, len, opt));
  }
  return out;
}

// Analysis and level estimation one channel at a time, without holding every
// channel signal in memory.
inline LevelFrames AnalyzeLevels(const GammatoneFilterbank& bank,
                                 std::span<const double> signal,
                                 double signal_rate,
                                 const LevelOptions& opt = {}) {
  bank.CheckRate(signal_rate);
  internal::CheckLevelOptions(opt);
  const double fs = bank.sample_rate();
  LevelFrames out = internal::MakeFrameHeader(bank.CenterFrequencies(),
                                              signal.size(), fs, opt);
  const std::size_t len = internal::SecondsToSamples(opt.frame_len_s, fs);
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const Samples ch = bank.AnalyzeChannel(k, signal);
    out.levels.push_back(
        internal::FrameLevels(ch, out.hop_samples, len, opt));
  }
  return out;
}

}  // namespace hlsim

#endif  // HLSIM_FILTERBANK_HPP_
