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


#ifndef HLSIM_TESTS_STORE_FIXTURE_HPP_
#define HLSIM_TESTS_STORE_FIXTURE_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hlsim/experiment.hpp"
#include "hlsim/service.hpp"
#include "hlsim/wav.hpp"
#include "test_util.hpp"

namespace hlsim::testing {

// A small lab store: items w0..w3 under conditions ref/a/b, and participants
//   "full": training (12 trials, 10/12 to pass), practice (6), main (24)
//   "main_only": main (24)
inline void WriteStoreFixture(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const std::vector<std::string> items = {"w0", "w1", "w2", "w3"};
  const std::vector<std::string> conds = {"ref", "a", "b"};
  nlohmann::json manifest = {{"items", nlohmann::json::array()}};
  for (const auto& item : items) {
    nlohmann::json files;
    for (std::size_t c = 0; c < conds.size(); ++c) {
      const std::string rel = "audio/" + item + "/" + conds[c] + ".wav";
      fs::create_directories((root / rel).parent_path());
      WavData w;
      w.samples = WhiteNoise(480, c + 1, 0.1);
      WriteWav(root / rel, w);
      files[conds[c]] = rel;
    }
    manifest["items"].push_back({{"id", item}, {"files", files}});
  }
  internal::WriteJsonFileAtomic(root / "manifest.json", manifest);
  fs::create_directories(root / "sessions");
  const auto save = [&](const SessionPlan& p) {
    internal::WriteJsonFileAtomic(root / "sessions" / (p.session_id + ".json"), nlohmann::json(p));
  };
  save(BuildTrainingSession("full-training", {"w0", "w1", "w2"}, "ref", {"a", "b"},
                            PassThreshold::Speech(), 1));
  save(BuildSession("full-practice", {"w0"}, conds, Phase::kPractice, 2));
  save(BuildSession("full-main", items, conds, Phase::kMain, 3));
  save(BuildSession("main_only-main", items, conds, Phase::kMain, 4));
  internal::WriteJsonFileAtomic(
      root / "experiment.json",
      {{"seed", 1},
       {"token_salt", "fixture-salt"},
       {"participants",
        {{"full", {{"training", "full-training"}, {"practice", "full-practice"},
                   {"main", "full-main"}}},
         {"main_only", {{"main", "main_only-main"}}}}}});
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline std::size_t LineCount(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return 0;
  std::ifstream in(path);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace hlsim::testing

#endif  // HLSIM_TESTS_STORE_FIXTURE_HPP_
