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

#include "hlsim/service.hpp"

#include <filesystem>
#include <fstream>
#include <thread>

#include "gtest/gtest.h"
#include "httplib.h"
#include "store_fixture.hpp"
#include "test_util.hpp"

namespace hlsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::LineCount;

class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = testing::TempDir("store");
    testing::WriteStoreFixture(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  static json Req(const std::string& pid, const std::string& sid, long i,
                  const std::string& choice = "first") {
    return {{"participant_id", pid}, {"session_id", sid}, {"trial_index", i}, {"choice", choice}};
  }

  static int StatusOf(ExperimentStore& s, const json& req) {
    try {
      return s.Submit(req).status;
    } catch (const HttpError& e) {
      return e.status();
    }
  }

  // Answers the active training instance with `correct` right answers.
  static void RunTraining(ExperimentStore& s, long correct) {
    const auto sid = s.State("full").session_id;
    const auto key = AnswerKey(s.Plan(sid));
    for (std::size_t i = 0; i < key.size(); ++i) {
      const bool right = static_cast<long>(i) < correct;
      const Choice c = right ? key[i] : (key[i] == Choice::kFirst ? Choice::kSecond : Choice::kFirst);
      s.Submit(Req("full", sid, static_cast<long>(i), ChoiceName(c)));
    }
  }

  static void RunAll(ExperimentStore& s, const std::string& pid, std::size_t from = 0) {
    const auto sid = s.State(pid).session_id;
    for (std::size_t i = from; i < s.Plan(sid).trials.size(); ++i) {
      s.Submit(Req(pid, sid, static_cast<long>(i), i % 3 ? "first" : "second"));
    }
  }

  fs::path root_;
};

TEST_F(StoreTest, InitialState) {
  ExperimentStore s(root_);
  EXPECT_EQ(s.Participants(), (std::vector<std::string>{"full", "main_only"}));
  EXPECT_EQ(s.State("full").phase, Phase::kTraining);
  EXPECT_EQ(s.State("full").session_id, "full-training");
  EXPECT_EQ(s.State("main_only").phase, Phase::kMain);
  EXPECT_EQ(s.Progress("full")["total"], 12);
  EXPECT_THROW(s.State("nobody"), HttpError);
}

TEST_F(StoreTest, SessionViewIsBlind) {
  ExperimentStore s(root_);
  for (const char* sid : {"full-training", "full-main"}) {
    const json v = s.SessionView(sid);
    const std::string dump = v.dump();
    for (const char* leak : {"\"ref\"", "\"a\"", "\"b\"", "answer", "w0", "item", ".wav"}) {
      EXPECT_EQ(dump.find(leak), std::string::npos) << sid << " leaks " << leak;
    }
    for (const auto& t : v["trials"]) {
      const std::string url = t["first"];
      ASSERT_EQ(url.rfind("/audio/", 0), 0u);
      EXPECT_TRUE(s.AudioPath(url.substr(7)).has_value());
    }
  }
  EXPECT_EQ(s.SessionView("full-training")["feedback"], true);
  EXPECT_EQ(s.SessionView("full-main")["n_trials"], 24);
}

TEST_F(StoreTest, AppendAndDuplicate) {
  ExperimentStore s(root_);
  const auto log = s.LogPath("main_only");
  const auto r = s.Submit(Req("main_only", "main_only-main", 0));
  EXPECT_EQ(r.status, 201);
  EXPECT_FALSE(r.body.contains("correct"));
  EXPECT_EQ(LineCount(log), 1u);
  const auto size = fs::file_size(log);
  EXPECT_EQ(StatusOf(s, Req("main_only", "main_only-main", 0, "second")), 409);
  EXPECT_EQ(fs::file_size(log), size);
}

TEST_F(StoreTest, ErrorStatuses) {
  ExperimentStore s(root_);
  EXPECT_EQ(StatusOf(s, {{"participant_id", "full"}}), 400);
  EXPECT_EQ(StatusOf(s, Req("full", "full-training", 0, "third")), 400);
  EXPECT_EQ(StatusOf(s, Req("full", "full-training", 99)), 400);
  EXPECT_EQ(StatusOf(s, Req("ghost", "full-training", 0)), 404);
  EXPECT_EQ(StatusOf(s, Req("full", "nope", 0)), 404);
  EXPECT_EQ(StatusOf(s, Req("full", "main_only-main", 0)), 404);
  EXPECT_EQ(StatusOf(s, Req("full", "full-main", 0)), 409);
  EXPECT_EQ(LineCount(s.LogPath("full")), 0u);
  try {
    s.AdvancePhase("full");
    FAIL();
  } catch (const HttpError& e) {
    EXPECT_EQ(e.status(), 409);
  }
}

TEST_F(StoreTest, TrainingFeedbackAndRetry) {
  ExperimentStore s(root_);
  const auto key = AnswerKey(s.Plan("full-training"));
  const Choice wrong = key[0] == Choice::kFirst ? Choice::kSecond : Choice::kFirst;
  const auto r = s.Submit(Req("full", "full-training", 0, ChoiceName(wrong)));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["correct"], false);
  EXPECT_EQ(r.body["answer"], ChoiceName(key[0]));

  // Finish at 9/12 (trial 0 already wrong).
  for (std::size_t i = 1; i < 12; ++i) {
    const Choice c = i <= 9 ? key[i] : (key[i] == Choice::kFirst ? Choice::kSecond : Choice::kFirst);
    const auto rr = s.Submit(Req("full", "full-training", static_cast<long>(i), ChoiceName(c)));
    if (i == 11) {
      EXPECT_EQ(rr.body["training"], "failed");
      EXPECT_EQ(rr.body["advanced"], true);
    }
  }
  auto st = s.State("full");
  EXPECT_EQ(st.phase, Phase::kTraining);
  EXPECT_EQ(st.attempt, 1);
  EXPECT_EQ(st.session_id, "full-training@1");
  ASSERT_EQ(st.history.size(), 1u);
  EXPECT_EQ(st.history[0].correct, 9);
  EXPECT_EQ(StatusOf(s, Req("full", "full-training", 0)), 409);
  EXPECT_EQ(s.SessionView("full-training@1")["n_trials"], 12);

  RunTraining(s, 10);
  st = s.State("full");
  EXPECT_EQ(st.phase, Phase::kPractice);
  EXPECT_EQ(st.history.back().correct, 10);
  EXPECT_TRUE(st.history.back().passed);
  EXPECT_EQ(s.Progress("full")["training_history"].size(), 2u);

  EXPECT_EQ(StatusOf(s, Req("full", "full-practice", 0)), 201);
  RunAll(s, "full", 1);
  EXPECT_EQ(s.State("full").phase, Phase::kMain);
  RunAll(s, "full");
  EXPECT_EQ(s.State("full").phase, Phase::kDone);
  EXPECT_EQ(StatusOf(s, Req("full", "full-main", 0)), 409);
  EXPECT_EQ(s.Progress("full")["phase"], "done");
}

TEST_F(StoreTest, ReplayReconstructsState) {
  ParticipantState full, other;
  {
    ExperimentStore s(root_);
    RunTraining(s, 9);
    RunTraining(s, 12);
    RunAll(s, "full");
    for (long i = 0; i < 5; ++i) s.Submit(Req("full", "full-main", i));
    for (long i = 0; i < 7; ++i) s.Submit(Req("main_only", "main_only-main", i, "second"));
    full = s.State("full");
    other = s.State("main_only");
  }
  ExperimentStore again(root_);
  EXPECT_EQ(again.State("full"), full);
  EXPECT_EQ(again.State("main_only"), other);
  EXPECT_EQ(again.State("full").responses, 12 + 12 + 6 + 5);
}

TEST_F(StoreTest, TornTailIsTrimmed) {
  {
    ExperimentStore s(root_);
    for (long i = 0; i < 3; ++i) s.Submit(Req("main_only", "main_only-main", i));
  }
  const auto log = root_ / "responses" / "main_only.jsonl";
  {
    std::ofstream out(log, std::ios::app);
    out << R"({"session_id":"main_only-main","partic)";
  }
  ExperimentStore s(root_);
  EXPECT_EQ(s.State("main_only").responses, 3);
  EXPECT_EQ(LineCount(log), 3u);
  EXPECT_EQ(s.Submit(Req("main_only", "main_only-main", 3)).status, 201);
  EXPECT_EQ(LineCount(log), 4u);
}

TEST_F(StoreTest, RejectsBadStores) {
  fs::remove(root_ / "audio" / "w1" / "a.wav");
  EXPECT_THROW(ExperimentStore{root_}, ConfigError);
  EXPECT_THROW(ExperimentStore{root_ / "missing"}, ConfigError);
}

TEST_F(StoreTest, RejectsCorruptLog) {
  fs::create_directories(root_ / "responses");
  std::ofstream(root_ / "responses" / "full.jsonl") << "not json\n";
  EXPECT_THROW(ExperimentStore{root_}, ConfigError);
}

TEST(TokenTest, StableAndSalted) {
  const auto a = AudioToken("s1", "w0", "ref");
  EXPECT_EQ(a.size(), 32u);
  EXPECT_EQ(a, AudioToken("s1", "w0", "ref"));
  EXPECT_NE(a, AudioToken("s2", "w0", "ref"));
  EXPECT_NE(a, AudioToken("s1", "w0", "a"));
  EXPECT_EQ(a.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST_F(StoreTest, HttpEndpoints) {
  ExperimentStore store(root_);
  httplib::Server server;
  RegisterRoutes(server, store);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto res = cli.Get("/api/session/full-training");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json view = json::parse(res->body);
  EXPECT_EQ(res->get_header_value("Content-Type").rfind("application/json", 0), 0u);

  const std::string url = view["trials"][0]["first"];
  res = cli.Get(url);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "audio/wav");
  EXPECT_EQ(res->get_header_value("Content-Length"), std::to_string(44 + 2 * 480));
  EXPECT_EQ(DecodeWav(res->body).samples.size(), 480u);
  EXPECT_EQ(cli.Get("/audio/0123abcd")->status, 404);
  EXPECT_EQ(cli.Get("/api/session/zzz")->status, 404);

  const auto post = [&](const json& j) {
    return cli.Post("/api/response", j.dump(), "application/json");
  };
  res = post(StoreTest::Req("main_only", "main_only-main", 0));
  EXPECT_EQ(res->status, 201);
  EXPECT_EQ(post(StoreTest::Req("main_only", "main_only-main", 0))->status, 409);
  EXPECT_EQ(cli.Post("/api/response", "{oops", "application/json")->status, 400);
  EXPECT_EQ(cli.Post("/api/response", "[1]", "application/json")->status, 400);
  res = post(StoreTest::Req("full", "full-training", 0));
  EXPECT_EQ(res->status, 200);
  EXPECT_TRUE(json::parse(res->body).contains("correct"));

  res = cli.Get("/api/progress/main_only");
  EXPECT_EQ(res->status, 200);
  const json prog = json::parse(res->body);
  EXPECT_EQ(prog["phase"], "main");
  EXPECT_EQ(prog["completed"], 1);
  EXPECT_EQ(prog["total"], 24);
  EXPECT_EQ(cli.Get("/api/progress/ghost")->status, 404);

  server.stop();
  th.join();
}

}  // namespace
}  // namespace hlsim
