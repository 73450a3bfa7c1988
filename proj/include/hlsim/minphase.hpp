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

// Minimum-phase FIR design from a sparse dB magnitude target, using the
// real-cepstrum folding method:
//
//   log|H| on the FFT grid -> real cepstrum -> fold the anticausal half onto
//   the causal half -> exp(FFT) -> inverse FFT -> first `fir_len` taps.
//
// The truncated response is tapered with a half-Hann over its last quarter,
// which keeps the truncation leakage well below -60 dB. The short filter
// still smooths the target around slope changes, so the grid-point target is
// refined a few times with the measured error (damped fixed-point update);
// the best iterate is kept.

#ifndef HLSIM_MINPHASE_HPP_
#define HLSIM_MINPHASE_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "hlsim/common.hpp"
#include "hlsim/fft.hpp"

namespace hlsim {

struct MinPhaseOptions {
  std::size_t taper_len = 0;  // 0 = fir_len / 4
  int max_refinements = 8;
  double damping = 0.5;
  double tolerance_db = 0.02;
};

struct MinPhaseFilter {
  std::vector<double> taps;
  std::vector<double> grid_hz;
  std::vector<double> grid_db;
};

// Designer bound to one (frequency grid, fir_len, fft_size, sample_rate)
// combination. Reusable across targets on the same grid; not thread-safe.
class MinPhaseDesigner {
 public:
  MinPhaseDesigner(std::vector<double> grid_hz, std::size_t fir_len,
                   std::size_t fft_size, double sample_rate,
                   MinPhaseOptions options = {})
      : grid_hz_(std::move(grid_hz)),
        fir_len_(fir_len),
        sample_rate_(sample_rate),
        options_(options),
        fft_(CheckedFftSize(fir_len, fft_size)) {
    if (options_.taper_len == 0) options_.taper_len = fir_len_ / 4;
    options_.taper_len = std::min(options_.taper_len, fir_len_ - 1);
    taper_.resize(options_.taper_len);
    for (std::size_t i = 0; i < taper_.size(); ++i) {
      taper_[i] = 0.5 + 0.5 * std::cos(std::numbers::pi *
                                       static_cast<double>(i + 1) /
                                       static_cast<double>(taper_.size() + 1));
    }
    if (grid_hz_.empty()) throw ConfigError("design grid is empty");
    if (!StrictlyIncreasing(grid_hz_)) {
      throw ConfigError("design grid must be strictly increasing");
    }
    if (!(grid_hz_.front() > 0.0 && grid_hz_.back() < sample_rate / 2.0)) {
      throw ConfigError("design grid must lie inside (0, Nyquist)");
    }
    // Precompute the log-frequency interpolation weights of every bin.
    const std::size_t bins = fft_.bins();
    bin_lo_.resize(bins);
    bin_t_.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate /
                       static_cast<double>(fft_.size());
      if (f <= grid_hz_.front()) {
        bin_lo_[k] = 0;
        bin_t_[k] = 0.0;
      } else if (f >= grid_hz_.back()) {
        bin_lo_[k] = grid_hz_.size() - 1;
        bin_t_[k] = 0.0;
      } else {
        const auto it = std::upper_bound(grid_hz_.begin(), grid_hz_.end(), f);
        const std::size_t hi = static_cast<std::size_t>(it - grid_hz_.begin());
        bin_lo_[k] = hi - 1;
        bin_t_[k] = std::log(f / grid_hz_[hi - 1]) /
                    std::log(grid_hz_[hi] / grid_hz_[hi - 1]);
      }
    }
    twiddle_.resize(grid_hz_.size() * fir_len_);
    for (std::size_t g = 0; g < grid_hz_.size(); ++g) {
      const double w = 2.0 * std::numbers::pi * grid_hz_[g] / sample_rate_;
      for (std::size_t n = 0; n < fir_len_; ++n) {
        twiddle_[g * fir_len_ + n] =
            std::polar(1.0, -w * static_cast<double>(n));
      }
    }
  }

  const std::vector<double>& grid() const { return grid_hz_; }
  std::size_t fir_len() const { return fir_len_; }
  std::size_t fft_size() const { return fft_.size(); }

  // Desired dB magnitude on the FFT bins 0..fft_size/2.
  std::vector<double> BinTargetDb(std::span<const double> target_db) const {
    std::vector<double> out(bin_lo_.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      const std::size_t lo = bin_lo_[k];
      const double t = bin_t_[k];
      out[k] = t == 0.0 ? target_db[lo]
                        : target_db[lo] + t * (target_db[lo + 1] - target_db[lo]);
    }
    return out;
  }

  // Magnitude of `taps` at every grid frequency, in dB.
  std::vector<double> GridResponseDb(std::span<const double> taps) const {
    std::vector<double> out(grid_hz_.size());
    for (std::size_t g = 0; g < grid_hz_.size(); ++g) {
      std::complex<double> acc = 0.0;
      const std::complex<double>* row = &twiddle_[g * fir_len_];
      for (std::size_t n = 0; n < taps.size(); ++n) acc += taps[n] * row[n];
      out[g] = AmplitudeToDb(std::abs(acc));
    }
    return out;
  }

  std::vector<double> DesignTaps(std::span<const double> target_db) {
    if (target_db.size() != grid_hz_.size()) {
      throw MismatchError("target size differs from the design grid");
    }
    std::vector<double> working(target_db.begin(), target_db.end());
    std::vector<double> best;
    double best_error = kInf;
    for (int iter = 0;; ++iter) {
      std::vector<double> taps = CepstralTaps(working);
      const std::vector<double> achieved = GridResponseDb(taps);
      double error = 0.0;
      for (std::size_t g = 0; g < achieved.size(); ++g) {
        error = std::max(error, std::abs(achieved[g] - target_db[g]));
      }
      if (error < best_error) {
        best_error = error;
        best = std::move(taps);
      }
      if (best_error <= options_.tolerance_db ||
          iter >= options_.max_refinements) {
        break;
      }
      for (std::size_t g = 0; g < working.size(); ++g) {
        working[g] -= options_.damping * (achieved[g] - target_db[g]);
      }
    }
    return best;
  }

  // One pass of the cepstral design for the given grid target, no refinement.
  std::vector<double> CepstralTaps(std::span<const double> target_db) {
    const std::size_t n = fft_.size();
    const std::vector<double> bin_db = BinTargetDb(target_db);

    // Real cepstrum of the (even) log magnitude.
    std::vector<std::complex<double>> log_mag(bin_db.size());
    constexpr double kDbToNeper = std::numbers::ln10 / 20.0;
    for (std::size_t k = 0; k < bin_db.size(); ++k) {
      log_mag[k] = bin_db[k] * kDbToNeper;
    }
    std::vector<double> cepstrum = fft_.Inverse(log_mag);

    // Fold: keep c[0] and c[n/2], double the causal part, drop the rest.
    for (std::size_t i = 1; i < n / 2; ++i) cepstrum[i] *= 2.0;
    for (std::size_t i = n / 2 + 1; i < n; ++i) cepstrum[i] = 0.0;

    std::vector<std::complex<double>> spectrum = fft_.Forward(cepstrum);
    for (auto& v : spectrum) v = std::exp(v);
    std::vector<double> impulse = fft_.Inverse(spectrum);
    impulse.resize(fir_len_);
    const std::size_t offset = fir_len_ - taper_.size();
    for (std::size_t i = 0; i < taper_.size(); ++i) {
      impulse[offset + i] *= taper_[i];
    }
    return impulse;
  }

  MinPhaseFilter Design(std::span<const double> target_db) {
    MinPhaseFilter out;
    out.taps = DesignTaps(target_db);
    out.grid_hz = grid_hz_;
    out.grid_db.assign(target_db.begin(), target_db.end());
    return out;
  }

 private:
  static std::size_t CheckedFftSize(std::size_t fir_len, std::size_t fft_size) {
    if (!IsPowerOfTwo(fft_size)) {
      throw ConfigError("design FFT size must be a power of two");
    }
    if (fir_len == 0 || fir_len > fft_size) {
      throw ConfigError("fir_len must be in [1, fft_size]");
    }
    return fft_size;
  }

  std::vector<double> grid_hz_;
  std::size_t fir_len_;
  double sample_rate_;
  MinPhaseOptions options_;
  RealFft fft_;
  std::vector<double> taper_;
  std::vector<std::complex<double>> twiddle_;
  std::vector<std::size_t> bin_lo_;
  std::vector<double> bin_t_;
};

inline MinPhaseFilter DesignMinPhaseFir(std::span<const double> freqs_hz,
                                        std::span<const double> target_db,
                                        std::size_t fir_len,
                                        std::size_t fft_size,
                                        double sample_rate,
                                        MinPhaseOptions options = {}) {
  MinPhaseDesigner designer(
      std::vector<double>(freqs_hz.begin(), freqs_hz.end()), fir_len,
      fft_size, sample_rate, options);
  return designer.Design(target_db);
}

}  // namespace hlsim

#endif  // HLSIM_MINPHASE_HPP_
