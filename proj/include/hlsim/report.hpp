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

#ifndef HLSIM_REPORT_HPP_
#define HLSIM_REPORT_HPP_

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "hlsim/experiment.hpp"
#include "hlsim/stats.hpp"
#include "json.hpp"

namespace hlsim {

struct ScoreReport {
  std::vector<std::string> conditions;
  ScoreTable table;
  std::vector<double> mean;  // across listeners, always present
  std::optional<ScoreResult> ci;
  std::optional<HsdResult> hsd;
  std::optional<double> q_crit;
  std::vector<std::string> warnings;
  std::size_t records = 0;
};

// Log -> per-listener preference matrices -> Thurstone scores -> mean, CI and
// optional HSD. Listeners whose matrix lacks a condition pair are left out
// with a warning.
inline ScoreReport BuildScoreReport(const std::vector<ResponseRecord>& records,
                                    std::optional<double> q_crit = std::nullopt,
                                    double level = 0.99) {
  ScoreReport report;
  report.q_crit = q_crit;
  report.conditions = ConditionsOf(records);
  for (const auto& r : records) report.records += r.phase == Phase::kMain;
  if (report.conditions.size() < 2) {
    throw ConfigError("log holds fewer than two main-phase conditions");
  }
  const auto matrices = AggregateCounts(records, report.conditions);
  report.table.conditions = report.conditions;
  long max_trials = 0;
  std::map<std::string, long> trials;
  for (const auto& [listener, m] : matrices) {
    long n = 0;
    for (const auto& row : m.counts) for (long c : row) n += c;
    trials[listener] = n;
    max_trials = std::max(max_trials, n);
  }
  for (const auto& [listener, m] : matrices) {
    try {
      report.table.scores.push_back(ThurstoneScores(m));
      report.table.listeners.push_back(listener);
    } catch (const ConfigError& e) {
      report.warnings.push_back("listener " + listener + " skipped: " + e.what());
      continue;
    }
    if (trials[listener] < max_trials) {
      report.warnings.push_back("listener " + listener + " has a partial log (" +
                                std::to_string(trials[listener]) + " of " +
                                std::to_string(max_trials) + " trials)");
    }
  }
  const std::size_t n = report.table.scores.size();
  if (n == 0) throw ConfigError("no listener could be scored");
  report.mean.assign(report.conditions.size(), 0.0);
  for (const auto& row : report.table.scores) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      report.mean[c] += row[c] / static_cast<double>(n);
    }
  }
  if (n < 2) {
    report.warnings.push_back(
        "only one listener: confidence intervals and HSD omitted");
    return report;
  }
  report.ci = MeanCi(report.table, level);
  if (q_crit) report.hsd = TukeyHsd(report.table, *q_crit);
  return report;
}

inline nlohmann::json ReportJson(const ScoreReport& r) {
  nlohmann::json j;
  j["conditions"] = r.conditions;
  j["mean"] = r.mean;
  j["listeners"] = r.table.listeners;
  j["per_listener"] = r.table.scores;
  j["records"] = r.records;
  j["warnings"] = r.warnings;
  if (r.ci) {
    j["ci_level"] = r.ci->level;
    j["ci_half_width"] = r.ci->ci_half_width;
  }
  if (r.hsd) {
    j["q_crit"] = *r.q_crit;
    j["ms_error"] = r.hsd->ms_error;
    j["df_error"] = r.hsd->df_error;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.hsd->pairs) {
      pairs.push_back({{"a", r.conditions[p.i]},
                       {"b", r.conditions[p.j]},
                       {"mean_diff", p.mean_diff},
                       {"q", p.q},
                       {"significant", p.significant}});
    }
    j["hsd"] = pairs;
  }
  return j;
}

inline std::string ReportText(const ScoreReport& r) {
  std::string out;
  char line[256];
  char ci_head[32] = "ci";
  if (r.ci) std::snprintf(ci_head, sizeof ci_head, "ci%g", r.ci->level * 100.0);
  std::snprintf(line, sizeof line, "%-16s %9s %12s\n", "condition", "mean", ci_head);
  out += line;
  for (std::size_t c = 0; c < r.conditions.size(); ++c) {
    if (r.ci) {
      std::snprintf(line, sizeof line, "%-16s %+9.3f %12.3f\n",
                    r.conditions[c].c_str(), r.mean[c], r.ci->ci_half_width[c]);
    } else {
      std::snprintf(line, sizeof line, "%-16s %+9.3f %12s\n",
                    r.conditions[c].c_str(), r.mean[c], "-");
    }
    out += line;
  }
  if (r.hsd) {
    std::snprintf(line, sizeof line, "\nTukey HSD (q_crit = %.3f, MS_error = %.4f)\n",
                  *r.q_crit, r.hsd->ms_error);
    out += line;
    for (const auto& p : r.hsd->pairs) {
      std::snprintf(line, sizeof line, "%-16s vs %-16s q = %7.3f %s\n",
                    r.conditions[p.i].c_str(), r.conditions[p.j].c_str(), p.q,
                    p.significant ? "**" : "");
      out += line;
    }
  }
  return out;
}

}  // namespace hlsim

#endif  // HLSIM_REPORT_HPP_
