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

// JSON forms of profiles, simulator settings and condition lists, plus the
// text layout of a decomposition row.

#ifndef HLSIM_CONFIG_HPP_
#define HLSIM_CONFIG_HPP_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hlsim/audiogram.hpp"
#include "hlsim/simulator.hpp"
#include "hlsim/stimuli.hpp"
#include "json.hpp"

namespace hlsim {

inline nlohmann::json LoadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// {"name", "frequencies_hz": [...], "hearing_level_db": [...]}.
inline AudiogramProfile ProfileFromJson(const nlohmann::json& j,
                                        const std::string& fallback_name = "") {
  try {
    return AudiogramProfile(
        j.value("name", fallback_name),
        j.at("frequencies_hz").get<std::vector<double>>(),
        j.at("hearing_level_db").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad profile: ") + e.what());
  }
}

inline nlohmann::json ProfileToJson(const AudiogramProfile& p) {
  return {{"name", p.name()},
          {"frequencies_hz", p.frequencies()},
          {"hearing_level_db", p.hearing_level()}};
}

// Built-in name ("70yr", "normal") or a JSON file.
inline AudiogramProfile LoadProfile(const std::string& name_or_path) {
  if (name_or_path == "70yr") return AudiogramProfile::SeventyYearOld();
  if (name_or_path == "normal" || name_or_path == "zero") {
    return AudiogramProfile::Normal();
  }
  const std::filesystem::path path(name_or_path);
  return ProfileFromJson(LoadJson(path), path.stem().string());
}

namespace internal {

inline nlohmann::json NumberOrInf(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) {
    if (std::isinf(x)) {
      out.push_back("inf");
    } else {
      out.push_back(x);
    }
  }
  return out;
}

inline std::vector<double> ParseNumberOrInf(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& x : j) {
    if (x.is_string() && x.get<std::string>() == "inf") {
      out.push_back(kInf);
    } else {
      out.push_back(x.get<double>());
    }
  }
  return out;
}

}  // namespace internal

inline nlohmann::json SettingsToJson(const SimulatorSettings& s) {
  return {{"sample_rate", s.bank.sample_rate},
          {"n_channels", s.bank.n_channels},
          {"f_lo", s.bank.f_lo},
          {"f_hi", s.bank.f_hi},
          {"filter_order", s.bank.filter_order},
          {"hop_ms", s.ola.frame_hop_s * 1000.0},
          {"frame_ms", s.ola.frame_len_s * 1000.0},
          {"fir_len", s.ola.fir_len},
          {"fft_size", s.ola.fft_size},
          {"calibration_db", s.calibration_db},
          {"floor_db", s.floor_db},
          {"cal_frequencies", s.cal.frequencies},
          {"g_cal", s.cal.g_cal},
          {"c_cap", internal::NumberOrInf(s.cal.c_cap)},
          {"l_at", s.cal.l_at},
          {"l_ceiling", s.cal.l_ceiling},
          {"spl_to_hl_offset", s.cal.spl_to_hl_offset}};
}

// Missing keys keep the value already in `s`. frame_ms defaults to 2 hops.
inline void ApplySettingsJson(const nlohmann::json& j, SimulatorSettings& s) {
  try {
    s.bank.sample_rate = j.value("sample_rate", s.bank.sample_rate);
    s.bank.n_channels = j.value("n_channels", s.bank.n_channels);
    s.bank.f_lo = j.value("f_lo", s.bank.f_lo);
    s.bank.f_hi = j.value("f_hi", s.bank.f_hi);
    s.bank.filter_order = j.value("filter_order", s.bank.filter_order);
    if (j.contains("hop_ms")) {
      s.ola.frame_hop_s = j["hop_ms"].get<double>() / 1000.0;
      s.ola.frame_len_s = 2.0 * s.ola.frame_hop_s;
    }
    if (j.contains("frame_ms")) s.ola.frame_len_s = j["frame_ms"].get<double>() / 1000.0;
    s.ola.fir_len = j.value("fir_len", s.ola.fir_len);
    s.ola.fft_size = j.value("fft_size", s.ola.fft_size);
    s.calibration_db = j.value("calibration_db", s.calibration_db);
    s.floor_db = j.value("floor_db", s.floor_db);
    if (j.contains("cal_frequencies")) {
      s.cal.frequencies = j["cal_frequencies"].get<std::vector<double>>();
    }
    if (j.contains("g_cal")) s.cal.g_cal = j["g_cal"].get<std::vector<double>>();
    if (j.contains("c_cap")) s.cal.c_cap = internal::ParseNumberOrInf(j["c_cap"]);
    if (j.contains("l_at")) s.cal.l_at = j["l_at"].get<std::vector<double>>();
    s.cal.l_ceiling = j.value("l_ceiling", s.cal.l_ceiling);
    if (j.contains("spl_to_hl_offset")) {
      s.cal.spl_to_hl_offset = j["spl_to_hl_offset"].get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad settings: ") + e.what());
  }
  s.bank.Validate();
  s.ola.Validate(s.bank.sample_rate);
  s.cal.Validate();
}

inline ConditionMethod ParseConditionMethod(const std::string& s) {
  if (s == "dtvf") return ConditionMethod::kDtvf;
  if (s == "fbas") return ConditionMethod::kFbas;
  if (s == "external") return ConditionMethod::kExternal;
  throw ConfigError("unknown condition method '" + s + "'");
}

inline std::string ConditionMethodName(ConditionMethod m) {
  switch (m) {
    case ConditionMethod::kDtvf: return "dtvf";
    case ConditionMethod::kFbas: return "fbas";
    case ConditionMethod::kExternal: return "external";
  }
  return "?";
}

inline ConditionSpec ConditionFromJson(const nlohmann::json& j) {
  try {
    ConditionSpec c;
    c.label = j.at("label").get<std::string>();
    c.method = ParseConditionMethod(j.value("method", std::string("dtvf")));
    c.alpha = j.value("alpha", 1.0);
    c.profile = j.value("profile", std::string("70yr"));
    c.external_dir = j.value("external_dir", std::string());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad condition: ") + e.what());
  }
}

inline nlohmann::json ConditionToJson(const ConditionSpec& c) {
  nlohmann::json j = {{"label", c.label},
                      {"method", ConditionMethodName(c.method)},
                      {"alpha", c.alpha},
                      {"profile", c.profile}};
  if (!c.external_dir.empty()) j["external_dir"] = c.external_dir;
  return j;
}

// Condition file: either an array of conditions or
// {"conditions": [...], "profiles": {name: profile}}.
struct ConditionSet {
  std::vector<ConditionSpec> conditions;
  std::map<std::string, AudiogramProfile> profiles;
};

inline ConditionSet ConditionSetFromJson(const nlohmann::json& j) {
  ConditionSet out;
  out.profiles.emplace("70yr", AudiogramProfile::SeventyYearOld());
  out.profiles.emplace("normal", AudiogramProfile::Normal());
  const nlohmann::json& list = j.is_array() ? j : j.at("conditions");
  for (const auto& c : list) out.conditions.push_back(ConditionFromJson(c));
  if (j.is_object() && j.contains("profiles")) {
    for (const auto& [name, p] : j["profiles"].items()) {
      out.profiles.insert_or_assign(name, ProfileFromJson(p, name));
    }
  }
  for (const auto& c : out.conditions) {
    if (c.method != ConditionMethod::kExternal && !out.profiles.contains(c.profile)) {
      throw ConfigError("condition " + c.label + " names unknown profile " + c.profile);
    }
  }
  return out;
}

inline std::string FormatDb(double v) {
  char buf[32];
  if (std::abs(v - std::round(v)) < 1e-9) {
    std::snprintf(buf, sizeof buf, "%.0f", std::round(v) + 0.0);
  } else {
    std::snprintf(buf, sizeof buf, "%.1f", v);
  }
  return buf;
}

// "act+pas" per frequency, space separated.
inline std::string FormatDecompositionRow(const HLDecomposition& d) {
  std::string out;
  for (std::size_t i = 0; i < d.frequencies.size(); ++i) {
    if (i) out += ' ';
    out += FormatDb(d.hl_act[i]) + "+" + FormatDb(d.hl_pas[i]);
  }
  return out;
}

}  // namespace hlsim

#endif  // HLSIM_CONFIG_HPP_
