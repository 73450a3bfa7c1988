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

#ifndef HLSIM_FFT_HPP_
#define HLSIM_FFT_HPP_

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "hlsim/common.hpp"

namespace hlsim {

// Fixed-size real FFT pair backed by FFTW. Not copyable; one instance per
// thread (execution reuses internal buffers).
class RealFft {
 public:
  explicit RealFft(std::size_t size) : size_(size) {
    if (size < 2) throw ConfigError("FFT size must be >= 2");
    time_ = fftw_alloc_real(size);
    freq_ = fftw_alloc_complex(size / 2 + 1);
    std::lock_guard<std::mutex> lock(PlannerMutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(size), time_, freq_,
                                    FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(size), freq_, time_,
                                    FFTW_ESTIMATE);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  ~RealFft() {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(time_);
    fftw_free(freq_);
  }

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  // `input` is zero-padded or truncated to size(). Returns bins() values.
  std::vector<std::complex<double>> Forward(std::span<const double> input) {
    for (std::size_t n = 0; n < size_; ++n) {
      time_[n] = n < input.size() ? input[n] : 0.0;
    }
    fftw_execute(forward_);
    std::vector<std::complex<double>> out(bins());
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = {freq_[k][0], freq_[k][1]};
    }
    return out;
  }

  // Inverse of Forward, including the 1/N scale.
  std::vector<double> Inverse(std::span<const std::complex<double>> spectrum) {
    if (spectrum.size() != bins()) {
      throw MismatchError("inverse FFT expects size/2 + 1 bins");
    }
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      freq_[k][0] = spectrum[k].real();
      freq_[k][1] = spectrum[k].imag();
    }
    fftw_execute(inverse_);
    std::vector<double> out(size_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t n = 0; n < size_; ++n) out[n] = time_[n] * scale;
    return out;
  }

 private:
  static std::mutex& PlannerMutex() {
    static std::mutex mutex;
    return mutex;
  }

  std::size_t size_;
  double* time_ = nullptr;
  fftw_complex* freq_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline bool IsPowerOfTwo(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace hlsim

#endif  // HLSIM_FFT_HPP_
