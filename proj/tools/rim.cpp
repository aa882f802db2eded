// Copyright 2026 The RIM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: run one configuration, sweep a variant x seed grid, or
// aggregate existing run logs.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rim/errors.hpp"
#include "rim/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rim;

constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> overrides;

  void Register(CLI::App* cmd, const exp::ExperimentConfig& defaults) {
    cmd->add_option("--config", config_file, "key=value file providing defaults")
        ->check(CLI::ExistingFile);
    const auto current = exp::ConfigToMap(defaults);
    for (const auto& key : exp::ConfigKeys()) {
      cmd->add_option("--" + key, overrides[key], "default: " + current.at(key));
    }
  }

  exp::ExperimentConfig Resolve() const {
    exp::ExperimentConfig cfg;
    if (!config_file.empty()) cfg = exp::LoadConfigFile(config_file);
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) exp::ApplySetting(cfg, key, value);
    }
    cfg.Validate();
    return cfg;
  }
};

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void WriteReport(std::span<const exp::RunLog> logs, const fs::path& dir) {
  fs::create_directories(dir);
  const auto summary = exp::AggregateSeeds(logs);
  WriteText(dir / "summary.csv", exp::SummaryCsv(summary));
  WriteText(dir / "selection_rate.csv", exp::SelectionRateCsv(logs));
  for (const auto& log : logs) {
    std::vector<double> scores;
    std::vector<std::uint64_t> frames;
    for (const auto& r : log.rows) {
      if (!r.primary()) continue;
      scores.push_back(*r.primary());
      frames.push_back(r.frames);
    }
    const auto smoothed = exp::Smooth(scores);
    std::ostringstream csv;
    csv << "frames,smoothed_score\n";
    for (std::size_t i = 0; i < smoothed.size(); ++i) {
      csv << frames[i] << "," << exp::FormatNumber(smoothed[i]) << "\n";
    }
    WriteText(dir / ("curve_" + log.variant + "_" + std::to_string(log.seed) + ".csv"), csv.str());
  }
  std::cout << exp::SummaryCsv(summary);
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      if (const auto dash = item.find('-'); dash != std::string::npos) {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw ConfigError("empty seed range " + item);
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      } else {
        seeds.push_back(std::stoull(item));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed list entry '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("no seeds given");
  return seeds;
}

std::vector<exp::Variant> ParseVariants(const std::string& text) {
  if (text == "all") return exp::AllVariants();
  std::vector<exp::Variant> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(exp::ParseVariant(item));
  if (out.empty()) throw ConfigError("no variants given");
  return out;
}

void PrintRun(const exp::RunLog& log) {
  const auto final_score = exp::FinalScore(log);
  std::cout << log.variant << " seed " << log.seed << ": final "
            << (final_score ? std::to_string(*final_score) : "n/a") << ", frames "
            << log.training_frames << ", generations " << log.generations << ", goal episodes "
            << log.goal_hits << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recruitment-imitation evolutionary RL experiments"};
  app.require_subcommand(1);
  const exp::ExperimentConfig defaults;

  std::string out_dir = "runs";
  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "train one configuration and write its logs");
  run_flags.Register(run, defaults);
  run->add_option("--out", out_dir, "output directory");

  ConfigFlags sweep_flags;
  std::string variants = "all";
  std::string seeds = "0-4";
  auto* sweep = app.add_subcommand("sweep", "train every variant x seed and aggregate");
  sweep_flags.Register(sweep, defaults);
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--variants", variants, "comma list or 'all'");
  sweep->add_option("--seeds", seeds, "comma list with ranges, e.g. 0-4,7");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "aggregate runlog_*.csv files in a directory");
  report->add_option("dir", report_dir, "directory with run logs")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", out_dir, "where to write summary files (default: the input dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      const auto cfg = run_flags.Resolve();
      const auto log = exp::Run(cfg);
      exp::WriteRunFiles(log, out_dir);
      PrintRun(log);
    } else if (*sweep) {
      const auto base = sweep_flags.Resolve();
      const auto variant_list = ParseVariants(variants);
      const auto seed_list = ParseSeeds(seeds);
      std::vector<exp::RunLog> logs;
      for (auto v : variant_list) {
        for (auto s : seed_list) {
          auto cfg = base;
          cfg.variant = v;
          cfg.seed = s;
          logs.push_back(exp::Run(cfg));
          exp::WriteRunFiles(logs.back(), out_dir);
          PrintRun(logs.back());
        }
      }
      WriteReport(logs, out_dir);
    } else if (*report) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(report_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("runlog_", 0) == 0 && entry.path().extension() == ".csv") {
          files.push_back(entry.path());
        }
      }
      if (files.empty()) throw ConfigError("no runlog_*.csv files in " + report_dir);
      std::sort(files.begin(), files.end());
      std::vector<exp::RunLog> logs;
      for (const auto& f : files) logs.push_back(exp::LoadRunFiles(f));
      WriteReport(logs, report->count("--out") ? fs::path(out_dir) : fs::path(report_dir));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return 0;
}
