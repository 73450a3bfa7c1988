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

#ifndef HLSIM_COMMON_HPP_
#define HLSIM_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlsim {

// Invalid parameters or malformed configuration files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inputs that are individually valid but do not fit together (sample rates,
// frame grids, channel grids).
class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Samples = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double DbToAmplitude(double db) { return std::pow(10.0, db / 20.0); }

inline double AmplitudeToDb(double amplitude) {
  return 20.0 * std::log10(amplitude);
}

// Linear interpolation of `values` over log(frequency), holding the edge
// values outside [freqs.front(), freqs.back()]. An infinite neighbour makes
// the result infinite unless `f` lands exactly on the finite grid point.
inline double InterpolateLogFrequency(std::span<const double> freqs,
                                      std::span<const double> values,
                                      double f) {
  if (freqs.empty() || freqs.size() != values.size()) {
    throw ConfigError("log-frequency interpolation needs a nonempty grid");
  }
  if (!(f > 0.0)) throw ConfigError("frequency must be positive");
  if (f <= freqs.front()) return values.front();
  if (f >= freqs.back()) return values.back();
  const auto upper = std::upper_bound(freqs.begin(), freqs.end(), f);
  const std::size_t hi = static_cast<std::size_t>(upper - freqs.begin());
  const std::size_t lo = hi - 1;
  if (f == freqs[lo]) return values[lo];
  if (std::isinf(values[lo]) || std::isinf(values[hi])) {
    return std::isinf(values[lo]) ? values[lo] : values[hi];
  }
  const double t = std::log(f / freqs[lo]) / std::log(freqs[hi] / freqs[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

inline bool StrictlyIncreasing(std::span<const double> xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) return false;
  }
  return true;
}

// Periodic Hann window; shifted copies at hop = length / 2 sum to one.
inline std::vector<double> PeriodicHann(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                static_cast<double>(n) /
                                static_cast<double>(length));
  }
  return w;
}

}  // namespace hlsim

#endif  // HLSIM_COMMON_HPP_
