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

// Listening-test store and HTTP front end.
//
// Store layout under the root directory:
//   manifest.json         stimuli: items[].id, items[].files{condition: path}
//   experiment.json       token_salt, participants{id: {training, practice,
//                         main}} naming session plans
//   sessions/<id>.json    SessionPlan
//   responses/<id>.jsonl  append-only ResponseRecord log per participant
//
// Participant state is never stored; it is replayed from the log on open.

#ifndef HLSIM_SERVICE_HPP_
#define HLSIM_SERVICE_HPP_

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hlsim/experiment.hpp"
#include "httplib.h"
#include "json.hpp"

namespace hlsim {

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& msg)
      : std::runtime_error(msg), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

inline HttpError BadRequest(const std::string& m) { return {400, m}; }
inline HttpError NotFound(const std::string& m) { return {404, m}; }
inline HttpError Conflict(const std::string& m) { return {409, m}; }

// FNV-1a, 64 bit.
inline std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string AudioToken(const std::string& salt, const std::string& item,
                              const std::string& condition) {
  const std::string key = salt + '\x1f' + item + '\x1f' + condition;
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(Fnv1a64(key)),
                static_cast<unsigned long long>(Fnv1a64(key + salt)));
  return buf;
}

inline std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03lldZ", static_cast<long long>(ms));
  return buf;
}

// Session ids per phase; an empty id means the phase is skipped.
struct ParticipantPlan {
  std::string training;
  std::string practice;
  std::string main;

  const std::string& For(Phase p) const {
    static const std::string kNone;
    switch (p) {
      case Phase::kTraining: return training;
      case Phase::kPractice: return practice;
      case Phase::kMain: return main;
      case Phase::kDone: break;
    }
    return kNone;
  }
};

struct TrainingAttempt {
  std::string session_id;
  long correct = 0;
  long total = 0;
  bool passed = false;

  bool operator==(const TrainingAttempt&) const = default;
};

struct ParticipantState {
  Phase phase = Phase::kTraining;
  long attempt = 0;            // training attempts already failed
  std::string session_id;      // active session instance, empty when done
  std::set<long> answered;     // trial indices answered in that instance
  long training_correct = 0;   // in the active training instance
  std::vector<TrainingAttempt> history;
  long responses = 0;          // log lines applied

  bool operator==(const ParticipantState&) const = default;
};

// Training attempt N > 0 runs under "<plan>@N".
inline std::string InstanceId(const std::string& plan, long attempt) {
  return attempt == 0 ? plan : plan + "@" + std::to_string(attempt);
}

inline std::string PlanOfInstance(const std::string& instance) {
  const auto at = instance.find('@');
  return at == std::string::npos ? instance : instance.substr(0, at);
}

namespace internal {

inline nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void WriteJsonFileAtomic(const std::filesystem::path& path,
                                const nlohmann::json& j) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << j.dump(2) << '\n';
    if (!out.flush()) throw ConfigError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// One write(2) under O_APPEND, fsync, then return.
inline void AppendDurable(const std::filesystem::path& path,
                          const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw std::runtime_error("open " + path.string() + ": " + std::strerror(errno));
  }
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = std::strerror(errno);
      ::close(fd);
      throw std::runtime_error("append " + path.string() + ": " + err);
    }
    done += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw std::runtime_error("fsync " + path.string() + " failed");
}

// Drops a torn final line left by a crash mid-append.
inline void TrimTornTail(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return;
  const auto size = std::filesystem::file_size(path);
  if (size == 0) return;
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), {});
  if (data.back() == '\n') return;
  const auto last = data.find_last_of('\n');
  std::filesystem::resize_file(path, last == std::string::npos ? 0 : last + 1);
}

}  // namespace internal

class ExperimentStore {
 public:
  // Loads and validates the store, then replays every participant log.
  explicit ExperimentStore(std::filesystem::path root) : root_(std::move(root)) {
    if (!std::filesystem::is_directory(root_)) {
      throw ConfigError("store " + root_.string() + " is not a directory");
    }
    LoadManifest();
    LoadExperiment();
    std::filesystem::create_directories(root_ / "responses");
    for (auto& [id, p] : participants_) Replay(id, *p);
  }

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path LogPath(const std::string& participant) const {
    return root_ / "responses" / (participant + ".jsonl");
  }

  std::vector<std::string> Participants() const {
    std::vector<std::string> out;
    for (const auto& [id, p] : participants_) out.push_back(id);
    return out;
  }

  ParticipantState State(const std::string& participant) const {
    const Participant& p = Find(participant);
    std::lock_guard lock(p.mu);
    return p.state;
  }

  const SessionPlan& Plan(const std::string& session_id) const {
    const auto it = plans_.find(PlanOfInstance(session_id));
    if (it == plans_.end()) throw NotFound("unknown session '" + session_id + "'");
    return it->second;
  }

  // Client view: audio as opaque URLs; items, labels and answers removed.
  nlohmann::json SessionView(const std::string& session_id) const {
    const SessionPlan& plan = Plan(session_id);
    nlohmann::json trials = nlohmann::json::array();
    for (std::size_t i = 0; i < plan.trials.size(); ++i) {
      const Trial& t = plan.trials[i];
      trials.push_back({{"index", i},
                        {"first", "/audio/" + Token(t.item, t.first)},
                        {"second", "/audio/" + Token(t.item, t.second)}});
    }
    return {{"session_id", session_id},
            {"phase", PhaseName(plan.phase)},
            {"feedback", plan.feedback},
            {"n_trials", plan.trials.size()},
            {"trials", trials}};
  }

  std::optional<std::filesystem::path> AudioPath(const std::string& token) const {
    const auto it = audio_.find(token);
    if (it == audio_.end()) return std::nullopt;
    return it->second;
  }

  nlohmann::json Progress(const std::string& participant) const {
    const Participant& p = Find(participant);
    std::lock_guard lock(p.mu);
    return ProgressJson(participant, p);
  }

  struct SubmitResult {
    int status = 201;
    nlohmann::json body;
  };

  // Validates, appends durably, then applies. The log never holds a record
  // that Apply would reject.
  SubmitResult Submit(const nlohmann::json& request) {
    std::string participant, session;
    long index = 0;
    Choice choice = Choice::kFirst;
    try {
      participant = request.at("participant_id").get<std::string>();
      session = request.at("session_id").get<std::string>();
      index = request.at("trial_index").get<long>();
      choice = ParseChoice(request.at("choice").get<std::string>());
    } catch (const std::exception& e) {
      throw BadRequest(std::string("malformed response: ") + e.what());
    }
    Participant& p = Find(participant);
    const SessionPlan& plan = Plan(session);
    if (index < 0 || index >= static_cast<long>(plan.trials.size())) {
      throw BadRequest("trial_index out of range");
    }
    std::lock_guard lock(p.mu);
    const Trial& t = plan.trials[static_cast<std::size_t>(index)];
    ResponseRecord r;
    r.session_id = session;
    r.participant_id = participant;
    r.trial_index = index;
    r.item = t.item;
    r.first = t.first;
    r.second = t.second;
    r.choice = choice;
    r.timestamp = UtcTimestamp();
    r.phase = plan.phase;
    Check(p, r);
    internal::AppendDurable(LogPath(participant), nlohmann::json(r).dump() + "\n");
    const ParticipantState before = p.state;
    Apply(p, r);

    SubmitResult out;
    out.body = {{"stored", true}, {"phase", PhaseName(p.state.phase)},
                {"session_id", p.state.session_id},
                {"advanced", before.session_id != p.state.session_id}};
    if (plan.phase == Phase::kTraining) {
      out.status = 200;
      out.body["correct"] = t.answer && *t.answer == choice;
      out.body["answer"] = ChoiceName(*t.answer);
      if (before.session_id != p.state.session_id) {
        out.body["training"] = p.state.history.back().passed ? "passed" : "failed";
      }
    }
    return out;
  }

  // Moves a participant whose active instance is complete to the next phase.
  Phase AdvancePhase(const std::string& participant) {
    Participant& p = Find(participant);
    std::lock_guard lock(p.mu);
    Advance(p);
    return p.state.phase;
  }

 private:
  struct Participant {
    ParticipantPlan plan;
    ParticipantState state;
    std::vector<ResponseRecord> current;  // records of the active instance
    mutable std::mutex mu;
  };

  std::string Token(const std::string& item, const std::string& cond) const {
    return AudioToken(salt_, item, cond);
  }

  Participant& Find(const std::string& id) const {
    const auto it = participants_.find(id);
    if (it == participants_.end()) throw NotFound("unknown participant '" + id + "'");
    return *it->second;
  }

  void LoadManifest() {
    const auto j = internal::ReadJsonFile(root_ / "manifest.json");
    for (const auto& item : j.at("items")) {
      const auto id = item.at("id").get<std::string>();
      for (const auto& [cond, rel] : item.at("files").items()) {
        const auto path = root_ / rel.get<std::string>();
        if (!std::filesystem::is_regular_file(path)) {
          throw ConfigError("missing audio " + path.string());
        }
        files_[{id, cond}] = path;
      }
    }
  }

  void LoadExperiment() {
    const auto j = internal::ReadJsonFile(root_ / "experiment.json");
    salt_ = j.at("token_salt").get<std::string>();
    for (const auto& [key, path] : files_) {
      audio_[Token(key.first, key.second)] = path;
    }
    for (const auto& [id, sessions] : j.at("participants").items()) {
      if (id.empty() || id.find_first_of("/\\.") != std::string::npos) {
        throw ConfigError("bad participant id '" + id + "'");
      }
      auto p = std::make_unique<Participant>();
      p->plan.training = sessions.value("training", std::string());
      p->plan.practice = sessions.value("practice", std::string());
      p->plan.main = sessions.value("main", std::string());
      if (p->plan.main.empty()) throw ConfigError("participant " + id + " has no main session");
      for (Phase ph : {Phase::kTraining, Phase::kPractice, Phase::kMain}) {
        const std::string& sid = p->plan.For(ph);
        if (!sid.empty()) LoadPlan(sid, ph);
      }
      Enter(*p, Phase::kTraining);
      participants_.emplace(id, std::move(p));
    }
  }

  void LoadPlan(const std::string& sid, Phase expected) {
    if (sid.find('@') != std::string::npos || sid.find('/') != std::string::npos) {
      throw ConfigError("bad session id '" + sid + "'");
    }
    auto it = plans_.find(sid);
    if (it == plans_.end()) {
      SessionPlan plan = internal::ReadJsonFile(root_ / "sessions" / (sid + ".json"))
                             .get<SessionPlan>();
      if (plan.session_id != sid) throw ConfigError("session file " + sid + " names " + plan.session_id);
      if (plan.trials.empty()) throw ConfigError("session " + sid + " has no trials");
      for (const Trial& t : plan.trials) {
        for (const auto* c : {&t.first, &t.second}) {
          if (!files_.contains({t.item, *c})) {
            throw ConfigError("session " + sid + " needs audio for " + t.item + "/" + *c);
          }
        }
      }
      it = plans_.emplace(sid, std::move(plan)).first;
    }
    if (it->second.phase != expected) {
      throw ConfigError("session " + sid + " is not a " + PhaseName(expected) + " plan");
    }
  }

  // Enters `phase`, skipping phases without a plan.
  void Enter(Participant& p, Phase phase) const {
    while (phase != Phase::kDone && p.plan.For(phase).empty()) {
      phase = static_cast<Phase>(static_cast<int>(phase) + 1);
    }
    p.state.phase = phase;
    p.state.session_id =
        phase == Phase::kDone
            ? std::string()
            : InstanceId(p.plan.For(phase), phase == Phase::kTraining ? p.state.attempt : 0);
    p.state.answered.clear();
    p.state.training_correct = 0;
    p.current.clear();
  }

  void Check(const Participant& p, const ResponseRecord& r) const {
    if (p.state.phase == Phase::kDone) throw Conflict("participant has finished");
    if (r.session_id != p.state.session_id) {
      if (PlanOfInstance(r.session_id) == PlanOfInstance(p.state.session_id) ||
          std::find_if(p.state.history.begin(), p.state.history.end(),
                       [&](const TrainingAttempt& a) { return a.session_id == r.session_id; }) !=
              p.state.history.end() ||
          r.session_id == p.plan.training || r.session_id == p.plan.practice ||
          r.session_id == p.plan.main) {
        throw Conflict("session " + r.session_id + " is not active (active: " +
                       p.state.session_id + ")");
      }
      throw NotFound("session " + r.session_id + " is not assigned to participant");
    }
    if (p.state.answered.contains(r.trial_index)) {
      throw Conflict("trial " + std::to_string(r.trial_index) + " already answered");
    }
  }

  void Apply(Participant& p, const ResponseRecord& r) const {
    const SessionPlan& plan = Plan(r.session_id);
    const Trial& t = plan.trials.at(static_cast<std::size_t>(r.trial_index));
    if (r.item != t.item || r.first != t.first || r.second != t.second ||
        r.phase != plan.phase) {
      throw ConfigError("record does not match plan " + plan.session_id);
    }
    p.state.answered.insert(r.trial_index);
    p.state.responses += 1;
    if (plan.phase == Phase::kTraining && t.answer && *t.answer == r.choice) {
      p.state.training_correct += 1;
    }
    p.current.push_back(r);
    if (p.state.answered.size() == plan.trials.size()) Advance(p);
  }

  void Advance(Participant& p) const {
    if (p.state.phase == Phase::kDone) throw Conflict("participant has finished");
    const SessionPlan& plan = Plan(p.state.session_id);
    if (p.state.answered.size() < plan.trials.size()) {
      throw Conflict("phase " + PhaseName(p.state.phase) + " incomplete: " +
                     std::to_string(p.state.answered.size()) + " of " +
                     std::to_string(plan.trials.size()) + " trials");
    }
    switch (p.state.phase) {
      case Phase::kTraining: {
        const GradeResult g =
            GradeTraining(p.current, AnswerKey(plan), *plan.pass_threshold);
        p.state.history.push_back({p.state.session_id, g.correct, g.total, g.passed});
        if (g.passed) {
          Enter(p, Phase::kPractice);
        } else {
          p.state.attempt += 1;
          Enter(p, Phase::kTraining);
        }
        break;
      }
      case Phase::kPractice: Enter(p, Phase::kMain); break;
      case Phase::kMain: Enter(p, Phase::kDone); break;
      case Phase::kDone: break;
    }
  }

  void Replay(const std::string& id, Participant& p) const {
    const auto path = LogPath(id);
    internal::TrimTornTail(path);
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path);
    const ParsedLog log = ParseResponseLog(in);
    if (!log.errors.empty()) {
      throw ConfigError(path.string() + " line " +
                        std::to_string(log.errors.front().first) + ": " +
                        log.errors.front().second);
    }
    for (const ResponseRecord& r : log.records) {
      try {
        if (r.participant_id != id) throw ConfigError("record for " + r.participant_id);
        Check(p, r);
        Apply(p, r);
      } catch (const std::exception& e) {
        throw ConfigError("replay of " + path.string() + " failed at response " +
                          std::to_string(p.state.responses + 1) + ": " + e.what());
      }
    }
  }

  nlohmann::json ProgressJson(const std::string& id, const Participant& p) const {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& a : p.state.history) {
      history.push_back({{"session_id", a.session_id}, {"correct", a.correct},
                         {"total", a.total}, {"passed", a.passed}});
    }
    nlohmann::json j = {{"participant_id", id},
                        {"phase", PhaseName(p.state.phase)},
                        {"session_id", p.state.session_id},
                        {"completed", p.state.answered.size()},
                        {"total", 0},
                        {"training_attempt", p.state.attempt + 1},
                        {"training_correct", p.state.training_correct},
                        {"training_history", history},
                        {"responses", p.state.responses}};
    if (p.state.phase != Phase::kDone) {
      j["total"] = Plan(p.state.session_id).trials.size();
    }
    return j;
  }

  std::filesystem::path root_;
  std::string salt_;
  std::map<std::pair<std::string, std::string>, std::filesystem::path> files_;
  std::map<std::string, std::filesystem::path> audio_;
  std::map<std::string, SessionPlan> plans_;
  std::map<std::string, std::unique_ptr<Participant>> participants_;
};

namespace internal {

inline void SendJson(httplib::Response& res, int status, const nlohmann::json& j) {
  res.status = status;
  res.set_content(j.dump(), "application/json; charset=utf-8");
}

template <typename F>
void Guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const HttpError& e) {
    SendJson(res, e.status(), {{"error", e.what()}});
  } catch (const std::exception& e) {
    SendJson(res, 500, {{"error", e.what()}});
  }
}

}  // namespace internal

inline void RegisterRoutes(httplib::Server& server, ExperimentStore& store) {
  using internal::Guarded;
  using internal::SendJson;
  server.Get(R"(/api/session/([^/]+))", [&store](const httplib::Request& req,
                                                 httplib::Response& res) {
    Guarded(res, [&] { SendJson(res, 200, store.SessionView(req.matches[1])); });
  });
  server.Get(R"(/audio/([0-9a-f]+))", [&store](const httplib::Request& req,
                                               httplib::Response& res) {
    Guarded(res, [&] {
      const auto path = store.AudioPath(req.matches[1]);
      if (!path) throw NotFound("unknown audio token");
      std::ifstream in(*path, std::ios::binary);
      if (!in) throw std::runtime_error("audio file unreadable");
      std::string bytes((std::istreambuf_iterator<char>(in)), {});
      res.status = 200;
      res.set_header("Cache-Control", "no-store");
      res.set_content(std::move(bytes), "audio/wav");
    });
  });
  server.Post("/api/response", [&store](const httplib::Request& req,
                                        httplib::Response& res) {
    Guarded(res, [&] {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const std::exception& e) {
        throw BadRequest(std::string("body is not JSON: ") + e.what());
      }
      if (!body.is_object()) throw BadRequest("body must be a JSON object");
      const auto result = store.Submit(body);
      SendJson(res, result.status, result.body);
    });
  });
  server.Get(R"(/api/progress/([^/]+))", [&store](const httplib::Request& req,
                                                  httplib::Response& res) {
    Guarded(res, [&] { SendJson(res, 200, store.Progress(req.matches[1])); });
  });
}

}  // namespace hlsim

#endif  // HLSIM_SERVICE_HPP_
