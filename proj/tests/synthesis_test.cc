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

#include "hlsim/synthesis.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "hlsim/simulator.hpp"
#include "hlsim/stimuli.hpp"
#include "test_util.hpp"

namespace hlsim {
namespace {

using testing::Energy;
using testing::Sine;
using testing::WhiteNoise;

constexpr double kFs = 48000.0;

const GammatoneFilterbank& Bank() {
  static const GammatoneFilterbank bank(FilterbankSpec{});
  return bank;
}

const ActiveGainCalibration kCal = ActiveGainCalibration::Default();

GainTrajectory Trajectory(const std::vector<double>& x, const AudiogramProfile& p,
                          double alpha) {
  const auto levels = AnalyzeLevels(Bank(), x, kFs);
  return ComputeGainTrajectory(levels, DecomposeHl(p, CompressionHealth(alpha), kCal), kCal);
}

TEST(GainTrajectoryTest, AlphaOneIsLevelIndependent) {
  const auto p = AudiogramProfile::SeventyYearOld();
  auto x = WhiteNoise(4800, 1, 30.0);
  for (std::size_t i = 0; i < 2400; ++i) x[i] *= 1e-3;
  const auto tr = Trajectory(x, p, 1.0);
  for (std::size_t k = 0; k < tr.r_total.size(); ++k) {
    for (double r : tr.r_total[k]) {
      EXPECT_NEAR(r, InterpolateHl(p, tr.center_frequencies[k]), 1e-12);
    }
  }
}

TEST(GainTrajectoryTest, ZeroProfileIsZero) {
  const auto tr = Trajectory(WhiteNoise(2000, 2), AudiogramProfile::Normal(), 0.0);
  for (const auto& row : tr.r_total) {
    for (double r : row) EXPECT_EQ(r, 0.0);
  }
}

TEST(GainTrajectoryTest, LouderNeverReducesMore) {
  const auto p = AudiogramProfile::SeventyYearOld();
  const auto x = WhiteNoise(4800, 3, 3.0);
  std::vector<double> y(x);
  for (double& v : y) v *= DbToAmplitude(10.0);
  const auto a = Trajectory(x, p, 0.0);
  const auto b = Trajectory(y, p, 0.0);
  for (std::size_t k = 0; k < a.r_total.size(); ++k) {
    for (std::size_t t = 0; t < a.r_total[k].size(); ++t) {
      EXPECT_LE(b.r_total[k][t], a.r_total[k][t] + 1e-12);
      EXPECT_GE(b.r_total[k][t], 0.0);
    }
  }
}

TEST(GainTrajectoryTest, GridMismatch) {
  LevelFrames lv = AnalyzeLevels(Bank(), WhiteNoise(480, 1), kFs);
  lv.levels.pop_back();
  EXPECT_THROW(ComputeGainTrajectory(
                   lv, DecomposeHl(AudiogramProfile::Normal(), CompressionHealth(1), kCal), kCal),
               MismatchError);
}

TEST(DtvfTest, SilenceInSilenceOut) {
  const std::vector<double> x(4800, 0.0);
  const auto y = SynthDtvf(x, Trajectory(x, AudiogramProfile::SeventyYearOld(), 0.0));
  ASSERT_EQ(y.size(), x.size());
  for (double v : y) EXPECT_EQ(v, 0.0);
}

// Identity filters in every frame: the Hann windows at 50% overlap sum to one.
TEST(DtvfTest, ColaIdentity) {
  for (std::size_t n : {1u, 47u, 96u, 1001u, 48000u}) {
    const auto x = WhiteNoise(n, n);
    const auto y = SynthDtvf(x, Trajectory(x, AudiogramProfile::Normal(), 0.5));
    ASSERT_EQ(y.size(), n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(y[i] - x[i]));
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    EXPECT_LE(err / peak, 1e-6) << "n = " << n;
  }
}

TEST(DtvfTest, AlphaOneEqualsStaticFilter) {
  const auto x = testing::SpeechShapedNoise(48000, kFs, 4);
  const auto tr = Trajectory(x, AudiogramProfile::SeventyYearOld(), 1.0);
  const auto y = SynthDtvf(x, tr);
  const auto ref = StaticMinPhaseFilter(x, tr, tr.frames() / 2);
  EXPECT_LE(testing::RelativeErrorDb(y, ref), -50.0);
}

TEST(DtvfTest, SineDropMatchesTable) {
  SimulatorSettings s;
  const HearingLossSimulator sim(s, AudiogramProfile::SeventyYearOld(), CompressionHealth(1));
  const auto x = SetLeq(Sine(48000, 1000.0, kFs), 70.0);
  const auto y = sim.Process(x, kFs, SynthesisMethod::kDtvf);
  EXPECT_NEAR(Leq(x) - Leq(y), 10.0, 1.0);
}

TEST(DtvfTest, MismatchedTrajectory) {
  const auto x = WhiteNoise(960, 1);
  auto tr = Trajectory(x, AudiogramProfile::Normal(), 1.0);
  EXPECT_THROW(SynthDtvf(std::vector<double>(2000, 0.0), tr), MismatchError);
  OlaParams ola;
  ola.frame_hop_s = 0.002;
  ola.frame_len_s = 0.004;
  EXPECT_THROW(SynthDtvf(x, tr, ola), MismatchError);
  ola = {};
  ola.frame_len_s = 0.003;
  EXPECT_THROW(SynthDtvf(x, tr, ola), ConfigError);
}

TEST(FbasTest, SilenceInSilenceOut) {
  const std::vector<double> x(2000, 0.0);
  const auto y = SynthFbasFromSignal(x, Trajectory(x, AudiogramProfile::SeventyYearOld(), 0.5),
                                     Bank());
  for (double v : y) EXPECT_EQ(v, 0.0);
}

// Long-term spectra by direct DFT bins on Hann frames.
TEST(FbasTest, ZeroLossIsSpectrallyFlat) {
  const auto x = WhiteNoise(1 << 17, 8);
  const auto y = SynthFbasFromSignal(x, Trajectory(x, AudiogramProfile::Normal(), 1.0), Bank());
  const testing::BandPowerOracle oracle(4096, kFs);
  for (double f = 250.0; f <= 8000.0; f *= std::pow(2.0, 1.0 / 3.0)) {
    EXPECT_NEAR(oracle.RatioDb(y, x, f), 0.0, 2.0) << f << " Hz";
  }
}

TEST(FbasTest, SeventyYearAttenuation) {
  const auto p = AudiogramProfile::SeventyYearOld();
  const auto x = WhiteNoise(1 << 17, 9);
  const auto y = SynthFbasFromSignal(x, Trajectory(x, p, 1.0), Bank());
  const testing::BandPowerOracle oracle(4096, kFs);
  for (double f = 250.0; f <= 8000.0; f *= std::pow(2.0, 1.0 / 3.0)) {
    EXPECT_NEAR(oracle.RatioDb(y, x, f), -InterpolateHl(p, f), 2.0) << f << " Hz";
  }
}

TEST(FbasTest, MatchesChannelPath) {
  const auto x = WhiteNoise(3000, 10);
  const auto tr = Trajectory(x, AudiogramProfile::SeventyYearOld(), 0.0);
  const auto a = SynthFbasFromSignal(x, tr, Bank());
  const auto b = SynthFbas(Bank().Analyze(x, kFs), tr, Bank());
  EXPECT_EQ(a, b);
}

TEST(FbasTest, GridMismatch) {
  const auto x = WhiteNoise(960, 1);
  auto tr = Trajectory(x, AudiogramProfile::Normal(), 1.0);
  FilterbankSpec s;
  s.n_channels = 50;
  const GammatoneFilterbank other(s);
  EXPECT_THROW(SynthFbasFromSignal(x, tr, other), MismatchError);
  tr.frame_times.resize(3);
  EXPECT_THROW(SynthFbasFromSignal(x, tr, Bank()), MismatchError);
}

TEST(SynthesisTest, EnergyBoundAndDeterminism) {
  SimulatorSettings s;
  const HearingLossSimulator sim(s, AudiogramProfile::SeventyYearOld(), CompressionHealth(0.5));
  const auto x = SetLeq(testing::SpeechShapedNoise(24000, kFs, 12), 70.0);
  for (auto m : {SynthesisMethod::kDtvf, SynthesisMethod::kFbas}) {
    const auto y1 = sim.Process(x, kFs, m);
    const auto y2 = sim.Process(x, kFs, m);
    EXPECT_EQ(y1, y2);
    EXPECT_LE(Energy(y1), Energy(x) * DbToAmplitude(0.5));
  }
}

TEST(SimulatorTest, MethodNames) {
  EXPECT_EQ(ParseMethod("dtvf"), SynthesisMethod::kDtvf);
  EXPECT_EQ(ParseMethod("fbas"), SynthesisMethod::kFbas);
  EXPECT_EQ(MethodName(SynthesisMethod::kFbas), "fbas");
  EXPECT_THROW(ParseMethod("camhls"), ConfigError);
}

TEST(SimulatorTest, RateMismatch) {
  const HearingLossSimulator sim({}, AudiogramProfile::SeventyYearOld(), CompressionHealth(1));
  EXPECT_THROW(sim.Process(std::vector<double>(100, 0.1), 44100.0, SynthesisMethod::kDtvf),
               MismatchError);
}

}  // namespace
}  // namespace hlsim
