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

// Paired-comparison session plans, response records, training grading and
// aggregation of responses into per-listener preference matrices.
//
// The listener's task is to pick the interval that contains MORE distortion;
// Choice::kFirst / kSecond name that interval.

#ifndef HLSIM_EXPERIMENT_HPP_
#define HLSIM_EXPERIMENT_HPP_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hlsim/common.hpp"
#include "hlsim/stats.hpp"
#include "json.hpp"

namespace hlsim {

enum class Phase { kTraining, kPractice, kMain, kDone };
enum class Choice { kFirst, kSecond };

inline std::string PhaseName(Phase p) {
  switch (p) {
    case Phase::kTraining: return "training";
    case Phase::kPractice: return "practice";
    case Phase::kMain: return "main";
    case Phase::kDone: return "done";
  }
  return "done";
}

inline Phase ParsePhase(const std::string& s) {
  if (s == "training") return Phase::kTraining;
  if (s == "practice") return Phase::kPractice;
  if (s == "main") return Phase::kMain;
  if (s == "done") return Phase::kDone;
  throw ConfigError("unknown phase '" + s + "'");
}

inline std::string ChoiceName(Choice c) {
  return c == Choice::kFirst ? "first" : "second";
}

inline Choice ParseChoice(const std::string& s) {
  if (s == "first") return Choice::kFirst;
  if (s == "second") return Choice::kSecond;
  throw ConfigError("choice must be 'first' or 'second'");
}

// Pass when correct / total >= correct_needed / out_of (exact rational
// comparison).
struct PassThreshold {
  long correct_needed = 10;
  long out_of = 12;

  static PassThreshold Speech() { return {10, 12}; }
  static PassThreshold Instrument() { return {7, 8}; }

  bool Passes(long correct, long total) const {
    return total > 0 && correct * out_of >= correct_needed * total;
  }
};

struct Trial {
  std::string item;
  std::string first;
  std::string second;
  std::optional<Choice> answer;  // more-distorted interval, training only
};

struct SessionPlan {
  std::string session_id;
  Phase phase = Phase::kMain;
  std::uint64_t seed = 0;
  std::vector<Trial> trials;
  std::optional<PassThreshold> pass_threshold;
  bool feedback = false;
};

struct ResponseRecord {
  std::string session_id;
  std::string participant_id;
  long trial_index = 0;
  std::string item;
  std::string first;
  std::string second;
  Choice choice = Choice::kFirst;
  std::string timestamp;
  Phase phase = Phase::kMain;

  const std::string& MoreDistorted() const {
    return choice == Choice::kFirst ? first : second;
  }
  const std::string& LessDistorted() const {
    return choice == Choice::kFirst ? second : first;
  }
};

// All ordered pairs (i, j), i != j, in row-major order.
inline std::vector<std::pair<std::string, std::string>> BuildPairs(
    const std::vector<std::string>& conditions) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    for (std::size_t j = 0; j < conditions.size(); ++j) {
      if (i != j) out.emplace_back(conditions[i], conditions[j]);
    }
  }
  return out;
}

namespace internal {

// Fisher-Yates driven by raw mt19937_64 output, so the permutation is the
// same on every standard library.
template <typename T>
void SeededShuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(v[i - 1], v[static_cast<std::size_t>(r % bound)]);
  }
}

}  // namespace internal

inline SessionPlan BuildSession(const std::string& session_id,
                                const std::vector<std::string>& items,
                                const std::vector<std::string>& conditions,
                                Phase phase, std::uint64_t seed) {
  if (items.empty() || conditions.empty()) {
    throw ConfigError("a session needs items and conditions");
  }
  SessionPlan plan;
  plan.session_id = session_id;
  plan.phase = phase;
  plan.seed = seed;
  for (const auto& item : items) {
    for (const auto& [a, b] : BuildPairs(conditions)) {
      plan.trials.push_back(Trial{item, a, b, std::nullopt});
    }
  }
  internal::SeededShuffle(plan.trials, seed);
  return plan;
}

// Training plan: every item paired (both orders) between the clean reference
// condition and each distorted condition; the distorted interval is the
// correct answer.
inline SessionPlan BuildTrainingSession(
    const std::string& session_id, const std::vector<std::string>& items,
    const std::string& clean, const std::vector<std::string>& distorted,
    PassThreshold threshold, std::uint64_t seed) {
  if (items.empty() || distorted.empty()) {
    throw ConfigError("a training session needs items and distorted conditions");
  }
  SessionPlan plan;
  plan.session_id = session_id;
  plan.phase = Phase::kTraining;
  plan.seed = seed;
  plan.feedback = true;
  plan.pass_threshold = threshold;
  for (const auto& item : items) {
    for (const auto& d : distorted) {
      plan.trials.push_back(Trial{item, clean, d, Choice::kSecond});
      plan.trials.push_back(Trial{item, d, clean, Choice::kFirst});
    }
  }
  internal::SeededShuffle(plan.trials, seed);
  return plan;
}

class IncompleteError : public std::runtime_error {
 public:
  explicit IncompleteError(std::vector<long> missing)
      : std::runtime_error(Format(missing)), missing_(std::move(missing)) {}
  const std::vector<long>& missing() const { return missing_; }

 private:
  static std::string Format(const std::vector<long>& missing) {
    std::string msg = "unanswered trials:";
    for (long i : missing) msg += " " + std::to_string(i);
    return msg;
  }
  std::vector<long> missing_;
};

struct GradeResult {
  bool passed = false;
  long correct = 0;
  long total = 0;
};

// `answer_key[i]` is the correct choice for trial i. Every trial must be
// answered exactly once.
inline GradeResult GradeTraining(const std::vector<ResponseRecord>& responses,
                                 const std::vector<Choice>& answer_key,
                                 PassThreshold threshold) {
  std::map<long, Choice> answered;
  for (const auto& r : responses) {
    if (r.trial_index < 0 ||
        r.trial_index >= static_cast<long>(answer_key.size())) {
      throw ConfigError("response for unknown trial " +
                        std::to_string(r.trial_index));
    }
    if (!answered.emplace(r.trial_index, r.choice).second) {
      throw ConfigError("trial " + std::to_string(r.trial_index) +
                        " answered twice");
    }
  }
  std::vector<long> missing;
  for (long i = 0; i < static_cast<long>(answer_key.size()); ++i) {
    if (!answered.contains(i)) missing.push_back(i);
  }
  if (!missing.empty()) throw IncompleteError(std::move(missing));
  GradeResult out;
  out.total = static_cast<long>(answer_key.size());
  for (const auto& [i, c] : answered) {
    if (c == answer_key[static_cast<std::size_t>(i)]) ++out.correct;
  }
  out.passed = threshold.Passes(out.correct, out.total);
  return out;
}

inline std::vector<Choice> AnswerKey(const SessionPlan& plan) {
  std::vector<Choice> key;
  for (const auto& t : plan.trials) {
    if (!t.answer) throw ConfigError("plan " + plan.session_id + " has no answer key");
    key.push_back(*t.answer);
  }
  return key;
}

// Main-phase responses only; other phases are ignored.
inline std::map<std::string, PreferenceMatrix> AggregateCounts(
    const std::vector<ResponseRecord>& responses,
    const std::vector<std::string>& conditions) {
  std::map<std::string, PreferenceMatrix> out;
  const PreferenceMatrix empty(conditions);
  for (const auto& r : responses) {
    if (r.phase != Phase::kMain) continue;
    const std::size_t more = empty.IndexOf(r.MoreDistorted());
    const std::size_t less = empty.IndexOf(r.LessDistorted());
    if (more == less) throw ConfigError("trial pairs a condition with itself");
    auto it = out.try_emplace(r.participant_id, conditions).first;
    it->second.Add(more, less);
  }
  return out;
}

// Conditions in order of first appearance among main-phase records.
inline std::vector<std::string> ConditionsOf(
    const std::vector<ResponseRecord>& responses) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : responses) {
    if (r.phase != Phase::kMain) continue;
    for (const auto* c : {&r.first, &r.second}) {
      if (seen.insert(*c).second) out.push_back(*c);
    }
  }
  return out;
}

inline ScoreTable ScorePerListener(
    const std::map<std::string, PreferenceMatrix>& matrices,
    const std::vector<std::string>& conditions) {
  ScoreTable table;
  table.conditions = conditions;
  for (const auto& [listener, m] : matrices) {
    table.listeners.push_back(listener);
    table.scores.push_back(ThurstoneScores(m));
  }
  return table;
}

// JSON wire formats.

inline void to_json(nlohmann::json& j, const PassThreshold& t) {
  j = nlohmann::json{{"correct", t.correct_needed}, {"of", t.out_of}};
}

inline void from_json(const nlohmann::json& j, PassThreshold& t) {
  t.correct_needed = j.at("correct").get<long>();
  t.out_of = j.at("of").get<long>();
  if (t.out_of <= 0 || t.correct_needed < 0 || t.correct_needed > t.out_of) {
    throw ConfigError("pass threshold must satisfy 0 <= correct <= of, of > 0");
  }
}

inline void to_json(nlohmann::json& j, const Trial& t) {
  j = nlohmann::json{{"item", t.item}, {"first", t.first}, {"second", t.second}};
  if (t.answer) j["answer"] = ChoiceName(*t.answer);
}

inline void from_json(const nlohmann::json& j, Trial& t) {
  t.item = j.at("item").get<std::string>();
  t.first = j.at("first").get<std::string>();
  t.second = j.at("second").get<std::string>();
  if (j.contains("answer") && !j["answer"].is_null()) {
    t.answer = ParseChoice(j["answer"].get<std::string>());
  } else {
    t.answer.reset();
  }
}

inline void to_json(nlohmann::json& j, const SessionPlan& p) {
  j = nlohmann::json{{"session_id", p.session_id},
                     {"phase", PhaseName(p.phase)},
                     {"seed", p.seed},
                     {"feedback", p.feedback},
                     {"trials", p.trials}};
  if (p.pass_threshold) j["pass_threshold"] = *p.pass_threshold;
}

inline void from_json(const nlohmann::json& j, SessionPlan& p) {
  p.session_id = j.at("session_id").get<std::string>();
  p.phase = ParsePhase(j.at("phase").get<std::string>());
  p.seed = j.value("seed", std::uint64_t{0});
  p.feedback = j.value("feedback", false);
  p.trials = j.at("trials").get<std::vector<Trial>>();
  if (j.contains("pass_threshold") && !j["pass_threshold"].is_null()) {
    p.pass_threshold = j["pass_threshold"].get<PassThreshold>();
  } else {
    p.pass_threshold.reset();
  }
  if (p.phase == Phase::kTraining && (!p.feedback || !p.pass_threshold)) {
    throw ConfigError("training plan " + p.session_id +
                      " needs feedback and a pass_threshold");
  }
}

inline void to_json(nlohmann::json& j, const ResponseRecord& r) {
  j = nlohmann::json{{"session_id", r.session_id},
                     {"participant_id", r.participant_id},
                     {"trial_index", r.trial_index},
                     {"item", r.item},
                     {"first", r.first},
                     {"second", r.second},
                     {"choice", ChoiceName(r.choice)},
                     {"timestamp", r.timestamp},
                     {"phase", PhaseName(r.phase)}};
}

inline void from_json(const nlohmann::json& j, ResponseRecord& r) {
  r.session_id = j.at("session_id").get<std::string>();
  r.participant_id = j.at("participant_id").get<std::string>();
  r.trial_index = j.at("trial_index").get<long>();
  r.item = j.at("item").get<std::string>();
  r.first = j.at("first").get<std::string>();
  r.second = j.at("second").get<std::string>();
  r.choice = ParseChoice(j.at("choice").get<std::string>());
  r.timestamp = j.value("timestamp", std::string());
  r.phase = ParsePhase(j.at("phase").get<std::string>());
}

struct ParsedLog {
  std::vector<ResponseRecord> records;
  // (1-based line number, message) for every line that failed to parse.
  std::vector<std::pair<std::size_t, std::string>> errors;
};

// JSON-lines response log. Blank lines are skipped; bad lines are reported
// and skipped.
inline ParsedLog ParseResponseLog(std::istream& in) {
  ParsedLog out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(nlohmann::json::parse(line).get<ResponseRecord>());
    } catch (const std::exception& e) {
      out.errors.emplace_back(number, e.what());
    }
  }
  return out;
}

}  // namespace hlsim

#endif  // HLSIM_EXPERIMENT_HPP_
