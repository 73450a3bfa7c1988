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

#include "hlsim/experiment.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace hlsim {
namespace {

std::vector<std::string> Labels(std::size_t k, const std::string& prefix = "c") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

TEST(BuildPairsTest, Counts) {
  EXPECT_EQ(BuildPairs(Labels(5)).size(), 20u);
  EXPECT_EQ(BuildPairs(Labels(2)).size(), 2u);
  EXPECT_EQ(BuildPairs(Labels(1)).size(), 0u);
  for (std::size_t k = 1; k <= 8; ++k) {
    const auto pairs = BuildPairs(Labels(k));
    EXPECT_EQ(pairs.size(), k * (k - 1));
    std::set<std::pair<std::string, std::string>> unique(pairs.begin(), pairs.end());
    EXPECT_EQ(unique.size(), pairs.size());
    for (const auto& [a, b] : pairs) {
      EXPECT_NE(a, b);
      EXPECT_TRUE(unique.contains({b, a}));
    }
  }
}

TEST(BuildSessionTest, TrialCounts) {
  EXPECT_EQ(BuildSession("s", Labels(10, "w"), Labels(5), Phase::kMain, 1).trials.size(), 200u);
  EXPECT_EQ(BuildSession("s", Labels(4, "i"), Labels(5), Phase::kMain, 1).trials.size(), 80u);
  for (std::size_t items = 1; items <= 4; ++items) {
    for (std::size_t k = 1; k <= 6; ++k) {
      EXPECT_EQ(BuildSession("s", Labels(items, "w"), Labels(k), Phase::kMain, 3).trials.size(),
                items * k * (k - 1));
    }
  }
}

TEST(BuildSessionTest, DeterministicAndSeedDependent) {
  const auto a = BuildSession("s", Labels(10, "w"), Labels(5), Phase::kMain, 42);
  const auto b = BuildSession("s", Labels(10, "w"), Labels(5), Phase::kMain, 42);
  const auto c = BuildSession("s", Labels(10, "w"), Labels(5), Phase::kMain, 43);
  EXPECT_EQ(nlohmann::json(a), nlohmann::json(b));
  EXPECT_NE(nlohmann::json(a)["trials"], nlohmann::json(c)["trials"]);
  // Same multiset of trials regardless of order.
  auto key = [](const SessionPlan& p) {
    std::multiset<std::string> s;
    for (const auto& t : p.trials) s.insert(t.item + "|" + t.first + "|" + t.second);
    return s;
  };
  EXPECT_EQ(key(a), key(c));
}

// Pinned permutation: the shuffle uses raw mt19937_64 output only.
TEST(BuildSessionTest, ShuffleIsPortable) {
  std::vector<int> v = {0, 1, 2, 3, 4, 5, 6, 7};
  internal::SeededShuffle(v, 7);
  std::vector<int> ref = {0, 1, 2, 3, 4, 5, 6, 7};
  std::mt19937_64 rng(7);
  for (std::size_t i = ref.size(); i > 1; --i) {
    std::uint64_t r;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % i;
    do r = rng(); while (r >= limit);
    std::swap(ref[i - 1], ref[r % i]);
  }
  EXPECT_EQ(v, ref);
}

TEST(BuildSessionTest, Errors) {
  EXPECT_THROW(BuildSession("s", {}, Labels(2), Phase::kMain, 1), ConfigError);
  EXPECT_THROW(BuildSession("s", Labels(2), {}, Phase::kMain, 1), ConfigError);
}

std::vector<ResponseRecord> Answer(const std::vector<Choice>& key, long correct) {
  std::vector<ResponseRecord> out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    ResponseRecord r;
    r.trial_index = static_cast<long>(i);
    const bool right = static_cast<long>(i) < correct;
    r.choice = right ? key[i] : (key[i] == Choice::kFirst ? Choice::kSecond : Choice::kFirst);
    out.push_back(r);
  }
  return out;
}

TEST(GradeTrainingTest, ThresholdBoundaries) {
  const auto speech = BuildTrainingSession("t", Labels(3, "w"), "ref", {"d1", "d2"},
                                           PassThreshold::Speech(), 1);
  const auto key = AnswerKey(speech);
  ASSERT_EQ(key.size(), 12u);
  EXPECT_TRUE(GradeTraining(Answer(key, 10), key, PassThreshold::Speech()).passed);
  EXPECT_TRUE(GradeTraining(Answer(key, 12), key, PassThreshold::Speech()).passed);
  const auto nine = GradeTraining(Answer(key, 9), key, PassThreshold::Speech());
  EXPECT_FALSE(nine.passed);
  EXPECT_EQ(nine.correct, 9);
  EXPECT_EQ(nine.total, 12);

  const auto inst = BuildTrainingSession("t", Labels(4, "i"), "ref", {"d"},
                                         PassThreshold::Instrument(), 1);
  const auto ikey = AnswerKey(inst);
  ASSERT_EQ(ikey.size(), 8u);
  EXPECT_TRUE(GradeTraining(Answer(ikey, 7), ikey, PassThreshold::Instrument()).passed);
  EXPECT_FALSE(GradeTraining(Answer(ikey, 6), ikey, PassThreshold::Instrument()).passed);
}

TEST(GradeTrainingTest, Exactness) {
  EXPECT_TRUE(PassThreshold::Speech().Passes(10, 12));
  EXPECT_FALSE(PassThreshold::Speech().Passes(9, 12));
  EXPECT_TRUE(PassThreshold::Speech().Passes(5, 6));
  EXPECT_TRUE(PassThreshold::Instrument().Passes(7, 8));
  EXPECT_FALSE(PassThreshold::Instrument().Passes(6, 8));
  EXPECT_FALSE(PassThreshold::Speech().Passes(0, 0));
}

TEST(GradeTrainingTest, MissingAndDuplicate) {
  const std::vector<Choice> key(12, Choice::kFirst);
  auto r = Answer(key, 12);
  r.erase(r.begin() + 3);
  r.erase(r.begin() + 7);
  try {
    GradeTraining(r, key, PassThreshold::Speech());
    FAIL();
  } catch (const IncompleteError& e) {
    EXPECT_EQ(e.missing(), (std::vector<long>{3, 8}));
  }
  auto d = Answer(key, 12);
  d.push_back(d[0]);
  EXPECT_THROW(GradeTraining(d, key, PassThreshold::Speech()), ConfigError);
}

TEST(BuildTrainingSessionTest, AnswersPointAtDistortedInterval) {
  const auto p = BuildTrainingSession("t", Labels(3, "w"), "ref", {"a", "b"},
                                      PassThreshold::Speech(), 9);
  EXPECT_TRUE(p.feedback);
  for (const auto& t : p.trials) {
    ASSERT_TRUE(t.answer);
    EXPECT_EQ(*t.answer == Choice::kFirst ? t.second : t.first, "ref");
  }
}

TEST(AggregateCountsTest, Examples) {
  EXPECT_TRUE(AggregateCounts({}, {"A", "B"}).empty());
  ResponseRecord r;
  r.participant_id = "p";
  r.first = "A";
  r.second = "B";
  r.choice = Choice::kFirst;
  const auto m = AggregateCounts({r}, {"A", "B"});
  EXPECT_EQ(m.at("p").counts[0][1], 1);
  EXPECT_EQ(m.at("p").counts[1][0], 0);
  EXPECT_EQ(m.at("p").totals[0][1], 1);
  EXPECT_EQ(m.at("p").totals[1][0], 1);
  r.phase = Phase::kTraining;
  EXPECT_TRUE(AggregateCounts({r}, {"A", "B"}).empty());
  r.phase = Phase::kMain;
  r.second = "Z";
  EXPECT_THROW(AggregateCounts({r}, {"A", "B"}), ConfigError);
}

TEST(ResponseLogTest, RoundTripAndLineErrors) {
  ResponseRecord r;
  r.session_id = "s";
  r.participant_id = "p";
  r.trial_index = 3;
  r.item = "w1";
  r.first = "A";
  r.second = "B";
  r.choice = Choice::kSecond;
  r.timestamp = "2026-01-01T00:00:00Z";
  std::stringstream log;
  log << nlohmann::json(r).dump() << "\n\n{bad json\n" << nlohmann::json(r).dump() << "\n"
      << R"({"session_id":"s"})" << "\n";
  const auto parsed = ParseResponseLog(log);
  ASSERT_EQ(parsed.records.size(), 2u);
  EXPECT_EQ(nlohmann::json(parsed.records[0]), nlohmann::json(r));
  ASSERT_EQ(parsed.errors.size(), 2u);
  EXPECT_EQ(parsed.errors[0].first, 3u);
  EXPECT_EQ(parsed.errors[1].first, 5u);
}

TEST(SessionPlanTest, JsonRoundTripAndValidation) {
  const auto p = BuildTrainingSession("t", Labels(2, "w"), "ref", {"a"},
                                      PassThreshold::Instrument(), 5);
  const auto back = nlohmann::json(p).get<SessionPlan>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(p));
  auto j = nlohmann::json(p);
  j.erase("pass_threshold");
  EXPECT_THROW(j.get<SessionPlan>(), ConfigError);
  j = nlohmann::json(p);
  j["pass_threshold"]["correct"] = 20;
  EXPECT_THROW(j.get<SessionPlan>(), ConfigError);
}

// Log -> counts -> scores is bit-stable, and a planted ordering is recovered.
TEST(ScorePipelineTest, StableAndRecoversPlantedOrder) {
  const auto conds = Labels(5);
  const std::map<std::string, double> latent = {
      {"c0", 0.5}, {"c1", 0.25}, {"c2", 0.0}, {"c3", -0.25}, {"c4", -0.5}};
  std::mt19937_64 rng(99);
  std::vector<ResponseRecord> log;
  for (int l = 0; l < 15; ++l) {
    const auto plan = BuildSession("m" + std::to_string(l), Labels(10, "w"), conds, Phase::kMain,
                                   static_cast<std::uint64_t>(l));
    const auto r = testing::SimulateListener("p" + std::to_string(l), plan, latent, rng);
    log.insert(log.end(), r.begin(), r.end());
  }
  const auto t1 = ScorePerListener(AggregateCounts(log, conds), conds);
  const auto t2 = ScorePerListener(AggregateCounts(log, conds), conds);
  EXPECT_EQ(t1.scores, t2.scores);
  const auto ci = MeanCi(t1);
  for (std::size_t c = 0; c + 1 < conds.size(); ++c) EXPECT_GT(ci.mean[c], ci.mean[c + 1]);
}

}  // namespace
}  // namespace hlsim
