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

#ifndef HLSIM_SIMULATOR_HPP_
#define HLSIM_SIMULATOR_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "hlsim/audiogram.hpp"
#include "hlsim/filterbank.hpp"
#include "hlsim/synthesis.hpp"

namespace hlsim {

enum class SynthesisMethod { kDtvf, kFbas };

inline std::string_view MethodName(SynthesisMethod m) {
  return m == SynthesisMethod::kDtvf ? "dtvf" : "fbas";
}

inline SynthesisMethod ParseMethod(std::string_view name) {
  if (name == "dtvf") return SynthesisMethod::kDtvf;
  if (name == "fbas") return SynthesisMethod::kFbas;
  throw ConfigError("unknown synthesis method '" + std::string(name) + "'");
}

struct SimulatorSettings {
  FilterbankSpec bank;
  OlaParams ola;
  double calibration_db = 30.0;
  double floor_db = -20.0;
  ActiveGainCalibration cal = ActiveGainCalibration::Default();

  // Level frames always share the overlap-add grid.
  LevelOptions Levels() const {
    LevelOptions opt;
    opt.frame_hop_s = ola.frame_hop_s;
    opt.frame_len_s = ola.frame_len_s;
    opt.calibration_db = calibration_db;
    opt.floor_db = floor_db;
    return opt;
  }
};

// Filterbank, decomposition and synthesis settings for one simulated
// listener. Immutable after construction; Process() is const and re-entrant.
class HearingLossSimulator {
 public:
  HearingLossSimulator(SimulatorSettings settings,
                       const AudiogramProfile& profile, CompressionHealth alpha)
      : settings_(std::move(settings)),
        bank_(settings_.bank),
        decomp_(DecomposeHl(profile, alpha, settings_.cal)) {
    settings_.ola.Validate(settings_.bank.sample_rate);
  }

  const SimulatorSettings& settings() const { return settings_; }
  const GammatoneFilterbank& bank() const { return bank_; }
  const HLDecomposition& decomposition() const { return decomp_; }

  GainTrajectory Trajectory(std::span<const double> signal,
                            double sample_rate) const {
    const LevelFrames levels =
        AnalyzeLevels(bank_, signal, sample_rate, settings_.Levels());
    return ComputeGainTrajectory(levels, decomp_, settings_.cal);
  }

  Samples Process(std::span<const double> signal, double sample_rate,
                  SynthesisMethod method) const {
    const GainTrajectory trajectory = Trajectory(signal, sample_rate);
    if (method == SynthesisMethod::kDtvf) {
      return SynthDtvf(signal, trajectory, settings_.ola);
    }
    return SynthFbasFromSignal(signal, trajectory, bank_);
  }

 private:
  SimulatorSettings settings_;
  GammatoneFilterbank bank_;
  HLDecomposition decomp_;
};

}  // namespace hlsim

#endif  // HLSIM_SIMULATOR_HPP_
