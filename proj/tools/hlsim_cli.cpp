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

// hlsim: simulate, decompose, prepare, session-build, serve, score, lsd.
// Data goes to stdout or files; diagnostics go to stderr.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hlsim/config.hpp"
#include "hlsim/report.hpp"
#include "hlsim/service.hpp"
#include "hlsim/simulator.hpp"
#include "hlsim/stimuli.hpp"
#include "hlsim/wav.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hlsim {
namespace {

struct CommonFlags {
  std::string settings_path;
  std::optional<double> cal_offset;
  std::optional<std::size_t> fir_len;
  std::optional<double> hop_ms;
  std::uint64_t seed = 0;
  bool show_config = false;
};

SimulatorSettings ResolveSettings(const CommonFlags& f) {
  SimulatorSettings s;
  json j = json::object();
  if (!f.settings_path.empty()) j = LoadJson(f.settings_path);
  if (f.cal_offset) j["calibration_db"] = *f.cal_offset;
  if (f.fir_len) j["fir_len"] = *f.fir_len;
  if (f.hop_ms) {
    j["hop_ms"] = *f.hop_ms;
    j.erase("frame_ms");
  }
  ApplySettingsJson(j, s);
  return s;
}

void AddCommon(CLI::App* app, CommonFlags& f) {
  app->add_option("--settings", f.settings_path, "synthesis settings JSON");
  app->add_option("--cal-offset", f.cal_offset,
                  "dB SPL of a digital RMS of 1.0 (default 30)");
  app->add_option("--fir-len", f.fir_len, "DTVF filter length (default 128)");
  app->add_option("--hop-ms", f.hop_ms, "frame hop in ms (default 1)");
  app->add_option("--seed", f.seed, "seed, echoed into outputs");
  app->add_flag("--show-config", f.show_config, "print the effective config and exit");
}

void PrintJson(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  CommonFlags common;
  std::string in, out;
  std::string profile = "70yr";
  double alpha = 1.0;
  std::string method = "dtvf";
  std::string format = "pcm16";
  bool verify_linear = false;
};

int RunSimulate(const SimulateArgs& a) {
  const SimulatorSettings s = ResolveSettings(a.common);
  const AudiogramProfile profile = LoadProfile(a.profile);
  const CompressionHealth alpha(a.alpha);
  const SynthesisMethod method = ParseMethod(a.method);
  if (a.format != "pcm16" && a.format != "float32") {
    throw ConfigError("--format must be pcm16 or float32");
  }
  if (a.verify_linear && (a.alpha != 1.0 || method != SynthesisMethod::kDtvf)) {
    throw ConfigError("--verify-linear needs --alpha 1 and --method dtvf");
  }
  json config = {{"command", "simulate"}, {"in", a.in}, {"out", a.out},
                 {"profile", ProfileToJson(profile)}, {"alpha", a.alpha},
                 {"method", a.method}, {"format", a.format},
                 {"seed", a.common.seed}, {"settings", SettingsToJson(s)}};
  if (a.common.show_config) {
    PrintJson(config);
    return 0;
  }
  if (a.in.empty() || a.out.empty()) throw ConfigError("simulate needs IN and OUT");
  const WavData input = ReadWav(a.in);
  if (input.sample_rate != s.bank.sample_rate) {
    throw ConfigError("input rate " + std::to_string(input.sample_rate) +
                      " Hz does not match the configured " +
                      std::to_string(s.bank.sample_rate) + " Hz");
  }
  if (input.samples.empty()) throw ConfigError("input has no samples");
  const HearingLossSimulator sim(s, profile, alpha);
  const GainTrajectory traj = sim.Trajectory(input.samples, input.sample_rate);
  Samples output = method == SynthesisMethod::kDtvf
                       ? SynthDtvf(input.samples, traj, s.ola)
                       : SynthFbasFromSignal(input.samples, traj, sim.bank());

  json report = {{"seed", a.common.seed},
                 {"input_leq_db", Leq(input.samples, s.calibration_db)},
                 {"output_leq_db", Leq(output, s.calibration_db)}};
  report["level_drop_db"] =
      report["input_leq_db"].get<double>() - report["output_leq_db"].get<double>();
  int status = 0;
  if (a.verify_linear) {
    const Samples ref = StaticMinPhaseFilter(input.samples, traj, 0, s.ola);
    double err = 0.0, energy = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      err += (output[i] - ref[i]) * (output[i] - ref[i]);
      energy += ref[i] * ref[i];
    }
    const double residual_db =
        energy == 0.0 ? (err == 0.0 ? -kInf : kInf) : 10.0 * std::log10(err / energy);
    report["linear_residual_db"] = std::isinf(residual_db) ? json(-999.0) : json(residual_db);
    report["linear_ok"] = residual_db <= -50.0;
    if (residual_db > -50.0) {
      std::cerr << "linear check failed: residual " << residual_db << " dB\n";
      status = 1;
    }
  }
  WavData out_wav{std::move(output), input.sample_rate,
                  a.format == "float32" ? WavFormat::kFloat32 : WavFormat::kPcm16};
  const std::size_t clipped = WriteWav(a.out, out_wav);
  report["clipped_samples"] = clipped;
  if (clipped > 0) {
    std::cerr << "warning: " << clipped << " samples exceed full scale"
              << (out_wav.format == WavFormat::kPcm16 ? " and were clipped" : "")
              << "; consider --cal-offset or --format float32\n";
  }
  PrintJson(report);
  return status;
}

// --------------------------------------------------------------- decompose

struct DecomposeArgs {
  CommonFlags common;
  std::string profile = "70yr";
  std::vector<double> alphas;
  bool as_json = false;
};

int RunDecompose(const DecomposeArgs& a) {
  const SimulatorSettings s = ResolveSettings(a.common);
  const AudiogramProfile profile = LoadProfile(a.profile);
  const std::vector<double> alphas =
      a.alphas.empty() ? std::vector<double>{1.0, 0.5, 0.0} : a.alphas;
  if (a.common.show_config) {
    PrintJson({{"command", "decompose"}, {"profile", ProfileToJson(profile)},
               {"alphas", alphas}, {"seed", a.common.seed},
               {"settings", SettingsToJson(s)}});
    return 0;
  }
  if (a.as_json) {
    json rows = json::array();
    for (double alpha : alphas) {
      const HLDecomposition d = DecomposeHl(profile, CompressionHealth(alpha), s.cal);
      rows.push_back({{"alpha", alpha}, {"frequencies", d.frequencies},
                      {"hl_act", d.hl_act}, {"hl_pas", d.hl_pas},
                      {"row", FormatDecompositionRow(d)}});
    }
    PrintJson({{"profile", profile.name()}, {"rows", rows}});
    return 0;
  }
  std::printf("%-8s", "alpha");
  for (double f : profile.frequencies()) std::printf(" %7.0f", f);
  std::printf("\n");
  std::printf("%-8s", "HL");
  for (double v : profile.hearing_level()) std::printf(" %7s", FormatDb(v).c_str());
  std::printf("\n");
  for (double alpha : alphas) {
    const HLDecomposition d = DecomposeHl(profile, CompressionHealth(alpha), s.cal);
    std::printf("%-8g", alpha);
    for (std::size_t i = 0; i < d.frequencies.size(); ++i) {
      const std::string cell = FormatDb(d.hl_act[i]) + "+" + FormatDb(d.hl_pas[i]);
      std::printf(" %7s", cell.c_str());
    }
    std::printf("\n");
  }
  return 0;
}

// ----------------------------------------------------------------- prepare

struct PrepareArgs {
  CommonFlags common;
  std::string source;
  std::string conditions;
  std::string reference;
  std::string rir;
  std::string out;
  std::string kind = "speech";
  double input_leq = 70.0;
};

std::vector<fs::path> WavFilesIn(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no .wav files in " + dir.string());
  return out;
}

int RunPrepare(const PrepareArgs& a) {
  const SimulatorSettings s = ResolveSettings(a.common);
  if (a.conditions.empty() || a.reference.empty()) {
    throw ConfigError("prepare needs --conditions and --reference");
  }
  const ConditionSet set = ConditionSetFromJson(LoadJson(a.conditions));
  ValidateConditions(set.conditions, a.reference);
  json conds = json::array();
  for (const auto& c : set.conditions) conds.push_back(ConditionToJson(c));
  json manifest = {{"seed", a.common.seed},
                   {"kind", a.kind},
                   {"reference", a.reference},
                   {"input_leq_db", a.input_leq},
                   {"calibration_db", s.calibration_db},
                   {"rir", a.rir},
                   {"conditions", conds},
                   {"settings", SettingsToJson(s)}};
  if (a.common.show_config) {
    PrintJson(manifest);
    return 0;
  }
  if (a.source.empty() || a.out.empty()) throw ConfigError("prepare needs --source and --out");
  std::optional<Samples> rir;
  if (!a.rir.empty()) {
    WavData r = ReadWav(a.rir);
    if (r.sample_rate != s.bank.sample_rate) throw ConfigError("RIR sample rate mismatch");
    rir = std::move(r.samples);
  }
  const auto sources = WavFilesIn(a.source);
  fs::create_directories(fs::path(a.out) / "audio");

  SimulatorRunner runner(
      s, set.profiles,
      [&s](const ConditionSpec& c, const std::string& item) -> Samples {
        const WavData w = ReadWav(fs::path(c.external_dir) / (item + ".wav"));
        if (w.sample_rate != s.bank.sample_rate) {
          throw ConfigError("external file rate mismatch for " + item);
        }
        return w.samples;
      });
  PrepareOptions opt;
  opt.input_leq_db = a.input_leq;
  opt.calibration_db = s.calibration_db;
  json items = json::array();
  int failures = 0;
  for (const auto& path : sources) {
    const std::string id = path.stem().string();
    const WavData src = ReadWav(path);
    if (src.sample_rate != s.bank.sample_rate) {
      std::cerr << id << ": sample rate mismatch, skipped\n";
      ++failures;
      continue;
    }
    try {
      std::optional<std::span<const double>> rir_span;
      if (rir) rir_span = std::span<const double>(*rir);
      const StimulusItem item = PrepareItem(id, src.samples, set.conditions,
                                            a.reference, rir_span,
                                            runner.ForItem(id), opt);
      const fs::path dir = fs::path(a.out) / "audio" / id;
      fs::create_directories(dir);
      json files = json::object(), leq = json::object(), lsd = json::object();
      const Samples& ref = item.prepared.at(a.reference).signal;
      for (const auto& [label, cond] : item.prepared) {
        const fs::path rel = fs::path("audio") / id / (label + ".wav");
        const std::size_t clipped = WriteWav(
            fs::path(a.out) / rel, WavData{cond.signal, s.bank.sample_rate, WavFormat::kFloat32});
        if (clipped > 0) {
          std::cerr << id << "/" << label << ": " << clipped
                    << " samples beyond full scale (float output, not clipped)\n";
        }
        files[label] = rel.string();
        leq[label] = cond.leq_db;
        if (label != a.reference) {
          lsd[label] = LogSpectralDistance(ref, cond.signal, s.bank.sample_rate);
        }
      }
      items.push_back({{"id", id}, {"kind", a.kind}, {"source", path.string()},
                       {"files", files}, {"leq_db", leq},
                       {"lsd_vs_reference_db", lsd}});
      std::cerr << id << ": ok\n";
    } catch (const std::exception& e) {
      std::cerr << id << ": " << e.what() << '\n';
      ++failures;
    }
  }
  manifest["items"] = items;
  internal::WriteJsonFileAtomic(fs::path(a.out) / "manifest.json", manifest);
  std::cout << (fs::path(a.out) / "manifest.json").string() << '\n';
  return failures == 0 ? 0 : 1;
}

// ----------------------------------------------------------- session-build

struct SessionBuildArgs {
  CommonFlags common;
  std::string store;
  std::vector<std::string> participants;
  int n_participants = 0;
  std::string reference;
  std::string threshold;
  int train_items = -1;
  int practice_items = 1;
};

PassThreshold ParseThreshold(const std::string& s, const std::string& kind) {
  if (s.empty()) return kind == "instrument" ? PassThreshold::Instrument() : PassThreshold::Speech();
  if (s == "speech") return PassThreshold::Speech();
  if (s == "instrument") return PassThreshold::Instrument();
  const auto slash = s.find('/');
  if (slash == std::string::npos) throw ConfigError("threshold must be speech, instrument or a/b");
  json j = {{"correct", std::stol(s.substr(0, slash))}, {"of", std::stol(s.substr(slash + 1))}};
  return j.get<PassThreshold>();
}

std::string HexId(std::mt19937_64& rng) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

int RunSessionBuild(const SessionBuildArgs& a) {
  if (a.store.empty()) throw ConfigError("session-build needs --store");
  const fs::path root(a.store);
  const json manifest = LoadJson(root / "manifest.json");
  const std::string kind = manifest.value("kind", std::string("speech"));
  const std::string reference =
      a.reference.empty() ? manifest.value("reference", std::string()) : a.reference;
  std::vector<std::string> items, conditions;
  for (const auto& it : manifest.at("items")) items.push_back(it.at("id").get<std::string>());
  for (const auto& c : manifest.at("conditions")) {
    conditions.push_back(c.at("label").get<std::string>());
  }
  if (items.empty()) throw ConfigError("manifest has no items");
  if (std::find(conditions.begin(), conditions.end(), reference) == conditions.end()) {
    throw ConfigError("reference '" + reference + "' is not a manifest condition");
  }
  std::vector<std::string> distorted;
  for (const auto& c : conditions) {
    if (c != reference) distorted.push_back(c);
  }
  const PassThreshold threshold = ParseThreshold(a.threshold, kind);
  // Default training size: enough items for `out_of` trials.
  const std::size_t per_item = 2 * distorted.size();
  std::size_t n_train = a.train_items >= 0
                            ? static_cast<std::size_t>(a.train_items)
                            : (static_cast<std::size_t>(threshold.out_of) + per_item - 1) / per_item;
  n_train = std::min(n_train, items.size());
  const std::size_t n_practice =
      std::min(static_cast<std::size_t>(std::max(a.practice_items, 0)), items.size());

  std::mt19937_64 rng(a.common.seed);
  std::vector<std::string> ids = a.participants;
  for (int i = 0; i < a.n_participants; ++i) ids.push_back("p" + HexId(rng));
  if (ids.empty()) throw ConfigError("no participants: use --participants or --n-participants");
  const std::string salt = HexId(rng);

  json config = {{"command", "session-build"}, {"store", a.store}, {"seed", a.common.seed},
                 {"reference", reference}, {"pass_threshold", threshold},
                 {"train_items", n_train}, {"practice_items", n_practice},
                 {"participants", ids}};
  if (a.common.show_config) {
    PrintJson(config);
    return 0;
  }
  fs::create_directories(root / "sessions");
  json participants = json::object();
  for (const auto& pid : ids) {
    const std::uint64_t s_train = rng(), s_practice = rng(), s_main = rng();
    json entry = json::object();
    if (n_train > 0 && !distorted.empty()) {
      const std::vector<std::string> train(items.begin(), items.begin() + n_train);
      const SessionPlan plan = BuildTrainingSession(pid + "-training", train, reference,
                                                    distorted, threshold, s_train);
      internal::WriteJsonFileAtomic(root / "sessions" / (plan.session_id + ".json"), plan);
      entry["training"] = plan.session_id;
    }
    if (n_practice > 0) {
      const std::vector<std::string> practice(items.begin(), items.begin() + n_practice);
      const SessionPlan plan =
          BuildSession(pid + "-practice", practice, conditions, Phase::kPractice, s_practice);
      internal::WriteJsonFileAtomic(root / "sessions" / (plan.session_id + ".json"), plan);
      entry["practice"] = plan.session_id;
    }
    const SessionPlan plan = BuildSession(pid + "-main", items, conditions, Phase::kMain, s_main);
    internal::WriteJsonFileAtomic(root / "sessions" / (plan.session_id + ".json"), plan);
    entry["main"] = plan.session_id;
    participants[pid] = entry;
  }
  internal::WriteJsonFileAtomic(root / "experiment.json",
                                {{"seed", a.common.seed},
                                 {"token_salt", salt},
                                 {"participants", participants}});
  ExperimentStore check(root);
  PrintJson({{"seed", a.common.seed}, {"participants", ids}});
  return 0;
}

// ------------------------------------------------------------------- serve

httplib::Server* g_server = nullptr;

void StopServer(int) {
  if (g_server) g_server->stop();
}

struct ServeArgs {
  std::string store;
  std::string host = "127.0.0.1";
  int port = 8080;
  bool show_config = false;
};

int RunServe(ServeArgs a) {
  if (a.store.empty()) {
    if (const char* env = std::getenv("HLS_LAB_STORE")) a.store = env;
  }
  if (a.show_config) {
    PrintJson({{"command", "serve"}, {"store", a.store}, {"host", a.host}, {"port", a.port}});
    return 0;
  }
  if (a.store.empty()) throw ConfigError("serve needs --store or HLS_LAB_STORE");
  ExperimentStore store(a.store);
  httplib::Server server;
  RegisterRoutes(server, store);
  g_server = &server;
  std::signal(SIGTERM, StopServer);
  std::signal(SIGINT, StopServer);
  if (!server.bind_to_port(a.host, a.port)) {
    throw std::runtime_error("cannot bind " + a.host + ":" + std::to_string(a.port));
  }
  std::cerr << "serving " << a.store << " on http://" << a.host << ":" << a.port << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}

// ------------------------------------------------------------------- score

struct ScoreArgs {
  std::string log;
  std::optional<double> q_crit;
  double level = 0.99;
  std::string json_out;
  std::uint64_t seed = 0;
  bool show_config = false;
};

int RunScore(const ScoreArgs& a) {
  if (a.show_config) {
    json j = {{"command", "score"}, {"log", a.log}, {"level", a.level}, {"seed", a.seed}};
    j["q_crit"] = a.q_crit ? json(*a.q_crit) : json(nullptr);
    PrintJson(j);
    return 0;
  }
  std::vector<ResponseRecord> records;
  std::size_t bad = 0;
  const fs::path path(a.log);
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ConfigError("cannot read " + f.string());
    ParsedLog log = ParseResponseLog(in);
    for (const auto& [line, msg] : log.errors) {
      std::cerr << f.string() << ":" << line << ": " << msg << '\n';
    }
    bad += log.errors.size();
    records.insert(records.end(), log.records.begin(), log.records.end());
  }
  const ScoreReport report = BuildScoreReport(records, a.q_crit, a.level);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  json j = ReportJson(report);
  j["seed"] = a.seed;
  j["malformed_lines"] = bad;
  if (!a.json_out.empty()) {
    internal::WriteJsonFileAtomic(a.json_out, j);
    std::cout << ReportText(report);
  } else {
    std::cout << ReportText(report) << '\n' << j.dump(2) << '\n';
  }
  return bad == 0 ? 0 : 1;
}

// --------------------------------------------------------------------- lsd

int RunLsd(const std::string& a_path, const std::string& b_path) {
  const WavData a = ReadWav(a_path);
  const WavData b = ReadWav(b_path);
  if (a.sample_rate != b.sample_rate) throw ConfigError("sample rates differ");
  PrintJson({{"lsd_db", LogSpectralDistance(a.samples, b.samples, a.sample_rate)},
             {"note", "exploratory"}});
  return 0;
}

}  // namespace
}  // namespace hlsim

int main(int argc, char** argv) {
  using namespace hlsim;
  CLI::App app{"hlsim: hearing-loss simulation and listening-test toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate hearing loss on a WAV file");
  c_sim->add_option("in", sim.in, "input WAV (mono)");
  c_sim->add_option("out", sim.out, "output WAV");
  c_sim->add_option("--profile", sim.profile, "70yr, normal, or profile JSON");
  c_sim->add_option("--alpha", sim.alpha, "compression health in [0, 1]");
  c_sim->add_option("--method", sim.method, "dtvf or fbas");
  c_sim->add_option("--format", sim.format, "pcm16 or float32");
  c_sim->add_flag("--verify-linear", sim.verify_linear,
                  "compare against one static filter pass (alpha 1, dtvf)");
  AddCommon(c_sim, sim.common);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "print active + passive loss per frequency");
  c_dec->add_option("--profile", dec.profile, "70yr, normal, or profile JSON");
  c_dec->add_option("--alpha", dec.alphas, "alpha values (default 1 0.5 0)");
  c_dec->add_flag("--json", dec.as_json, "JSON output");
  AddCommon(c_dec, dec.common);

  PrepareArgs prep;
  auto* c_prep = app.add_subcommand("prepare", "build level-matched stimuli per condition");
  c_prep->add_option("--source", prep.source, "directory of source WAVs");
  c_prep->add_option("--conditions", prep.conditions, "conditions JSON");
  c_prep->add_option("--reference", prep.reference, "reference condition label");
  c_prep->add_option("--rir", prep.rir, "room impulse response WAV");
  c_prep->add_option("--out", prep.out, "output store directory");
  c_prep->add_option("--kind", prep.kind, "speech or instrument");
  c_prep->add_option("--input-leq", prep.input_leq, "source level in dB (default 70)");
  AddCommon(c_prep, prep.common);

  SessionBuildArgs sb;
  auto* c_sb = app.add_subcommand("session-build", "write session plans into a store");
  c_sb->add_option("--store", sb.store, "store directory holding manifest.json")
      ->envname("HLS_LAB_STORE");
  c_sb->add_option("--participants", sb.participants, "participant ids")->delimiter(',');
  c_sb->add_option("--n-participants", sb.n_participants, "generate N opaque ids");
  c_sb->add_option("--reference", sb.reference, "clean condition (default: manifest)");
  c_sb->add_option("--threshold", sb.threshold, "speech, instrument or a/b");
  c_sb->add_option("--train-items", sb.train_items, "items in training");
  c_sb->add_option("--practice-items", sb.practice_items, "items in practice (0 skips)");
  AddCommon(c_sb, sb.common);

  ServeArgs srv;
  auto* c_srv = app.add_subcommand("serve", "run the listening-test service");
  c_srv->add_option("--store", srv.store, "store directory (default $HLS_LAB_STORE)");
  c_srv->add_option("--port", srv.port, "TCP port");
  c_srv->add_option("--host", srv.host, "bind address");
  c_srv->add_flag("--show-config", srv.show_config, "print the effective config and exit");

  ScoreArgs sc;
  auto* c_sc = app.add_subcommand("score", "Thurstone scores from a response log");
  c_sc->add_option("log", sc.log, "response .jsonl or directory of them")->required();
  c_sc->add_option("--q-crit", sc.q_crit, "studentized range critical value for HSD");
  c_sc->add_option("--level", sc.level, "confidence level (default 0.99)");
  c_sc->add_option("--json", sc.json_out, "write the JSON report here");
  c_sc->add_option("--seed", sc.seed, "seed, echoed into the report");
  c_sc->add_flag("--show-config", sc.show_config, "print the effective config and exit");

  std::string lsd_a, lsd_b;
  auto* c_lsd = app.add_subcommand("lsd", "log-spectral distance between two WAVs");
  c_lsd->add_option("a", lsd_a)->required();
  c_lsd->add_option("b", lsd_b)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (c_sim->parsed()) return RunSimulate(sim);
    if (c_dec->parsed()) return RunDecompose(dec);
    if (c_prep->parsed()) return RunPrepare(prep);
    if (c_sb->parsed()) return RunSessionBuild(sb);
    if (c_srv->parsed()) return RunServe(srv);
    if (c_sc->parsed()) return RunScore(sc);
    if (c_lsd->parsed()) return RunLsd(lsd_a, lsd_b);
  } catch (const std::exception& e) {
    std::cerr << "hlsim: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
