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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rim/errors.hpp"
#include "rim/experiment.hpp"

namespace rim::exp {
namespace {

std::string Cell(const std::optional<double>& v) { return v ? FormatNumber(*v) : ""; }

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> ParseCell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string EventKindName(EventKind k) {
  switch (k) {
    case EventKind::kImitation: return "imitation";
    case EventKind::kImitationSkipped: return "imitation_skipped";
    case EventKind::kInjection: return "injection";
  }
  return "?";
}

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::optional<SelectionRate> SelectionRateReport(std::span<const RunLog> logs) {
  std::size_t selected = 0;
  std::size_t total = 0;
  for (const auto& log : logs) {
    for (const auto& ev : log.events) {
      if (ev.kind != EventKind::kImitation || !ev.selected) continue;
      ++total;
      if (*ev.selected) ++selected;
    }
  }
  if (total == 0) return std::nullopt;
  SelectionRate rate;
  rate.events = total;
  rate.selected_fraction = static_cast<double>(selected) / static_cast<double>(total);
  rate.discarded_fraction = static_cast<double>(total - selected) / static_cast<double>(total);
  return rate;
}

std::optional<SelectionRate> SelectionRateReport(const RunLog& log) {
  return SelectionRateReport(std::span<const RunLog>(&log, 1));
}

std::optional<double> FinalScore(const RunLog& log) {
  if (log.rows.empty()) return std::nullopt;
  return log.rows.back().primary();
}

std::vector<SummaryRow> AggregateSeeds(std::span<const RunLog> logs) {
  Require(!logs.empty(), "aggregation needs at least one run log");
  std::vector<std::string> order;
  for (const auto& log : logs) {
    if (std::find(order.begin(), order.end(), log.variant) == order.end()) {
      order.push_back(log.variant);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& variant : order) {
    SummaryRow row;
    row.variant = variant;
    std::vector<double> finals;
    bool have_max = false;
    for (const auto& log : logs) {
      if (log.variant != variant) continue;
      for (const auto& r : log.rows) {
        if (const auto p = r.primary()) {
          row.max = have_max ? std::max(row.max, *p) : *p;
          have_max = true;
        }
      }
      if (const auto f = FinalScore(log)) finals.push_back(*f);
    }
    row.runs = finals.size();
    if (!finals.empty()) {
      const double n = static_cast<double>(finals.size());
      double sum = 0.0;
      for (double f : finals) sum += f;
      row.mean = sum / n;
      double ss = 0.0;
      for (double f : finals) ss += (f - row.mean) * (f - row.mean);
      const double std_dev = std::sqrt(ss / n);
      row.std_percent = row.mean == 0.0 ? 0.0 : std_dev / std::abs(row.mean) * 100.0;
      std::vector<double> sorted = finals;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      row.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> Smooth(std::span<const double> series, std::size_t window) {
  Require(window >= 1, "smoothing window must be positive");
  std::vector<double> out(series.size());
  double running = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    running += series[i];
    if (i >= window) running -= series[i - window];
    out[i] = running / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

std::string RunLogCsv(const RunLog& log) {
  std::string out = "frames,best_pop_score,rl_score,imitator_score\n";
  for (const auto& r : log.rows) {
    out += std::to_string(r.frames) + "," + Cell(r.best_pop_score) + "," + Cell(r.rl_score) +
           "," + Cell(r.imitator_score) + "\n";
  }
  return out;
}

std::string EventsCsv(const RunLog& log) {
  std::string out = "generation,frames,kind,member_index,pre_l1,post_l1,next_fitness,selected\n";
  for (const auto& e : log.events) {
    out += std::to_string(e.generation) + "," + std::to_string(e.frames) + "," +
           EventKindName(e.kind) + "," + std::to_string(e.member_index) + "," + Cell(e.pre_l1) +
           "," + Cell(e.post_l1) + "," + Cell(e.next_fitness) + "," +
           (e.selected ? (*e.selected ? "1" : "0") : "") + "\n";
  }
  return out;
}

std::string RunInfoCsv(const RunLog& log) {
  std::string out = "key,value\n";
  out += "variant," + log.variant + "\n";
  out += "env," + log.env + "\n";
  out += "seed," + std::to_string(log.seed) + "\n";
  out += "training_frames," + std::to_string(log.training_frames) + "\n";
  out += "population_frames," + std::to_string(log.population_frames) + "\n";
  out += "agent_frames," + std::to_string(log.agent_frames) + "\n";
  out += "evaluation_frames," + std::to_string(log.evaluation_frames) + "\n";
  out += "generations," + std::to_string(log.generations) + "\n";
  out += "train_steps," + std::to_string(log.train_steps) + "\n";
  out += "goal_hits," + std::to_string(log.goal_hits) + "\n";
  return out;
}

void WriteRunFiles(const RunLog& log, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = log.variant + "_" + std::to_string(log.seed) + ".csv";
  WriteFile(dir / ("runlog_" + stem), RunLogCsv(log));
  WriteFile(dir / ("events_" + stem), EventsCsv(log));
  WriteFile(dir / ("runinfo_" + stem), RunInfoCsv(log));
}

RunLog LoadRunFiles(const std::filesystem::path& runlog_csv) {
  const std::string name = runlog_csv.filename().string();
  const std::string prefix = "runlog_";
  if (name.rfind(prefix, 0) != 0 || runlog_csv.extension() != ".csv") {
    throw ConfigError("not a runlog file: " + name);
  }
  const std::string stem = runlog_csv.stem().string().substr(prefix.size());
  const auto underscore = stem.rfind('_');
  if (underscore == std::string::npos) throw ConfigError("cannot parse run name " + name);
  RunLog log;
  log.variant = stem.substr(0, underscore);
  log.seed = std::stoull(stem.substr(underscore + 1));

  std::istringstream rows(ReadFile(runlog_csv));
  std::string line;
  std::getline(rows, line);
  if (line != "frames,best_pop_score,rl_score,imitator_score") {
    throw ConfigError("unexpected runlog header in " + name);
  }
  while (std::getline(rows, line)) {
    if (line.empty()) continue;
    const auto cells = SplitCsvLine(line);
    if (cells.size() != 4) throw ConfigError("malformed runlog row in " + name);
    LogRow r;
    r.frames = std::stoull(cells[0]);
    r.best_pop_score = ParseCell(cells[1]);
    r.rl_score = ParseCell(cells[2]);
    r.imitator_score = ParseCell(cells[3]);
    log.rows.push_back(r);
  }

  const auto events_path = runlog_csv.parent_path() / ("events_" + stem + ".csv");
  if (std::filesystem::exists(events_path)) {
    std::istringstream events(ReadFile(events_path));
    std::getline(events, line);
    while (std::getline(events, line)) {
      if (line.empty()) continue;
      const auto c = SplitCsvLine(line);
      if (c.size() != 8) throw ConfigError("malformed events row for " + stem);
      Event e;
      e.generation = std::stoull(c[0]);
      e.frames = std::stoull(c[1]);
      if (c[2] == "imitation") {
        e.kind = EventKind::kImitation;
      } else if (c[2] == "imitation_skipped") {
        e.kind = EventKind::kImitationSkipped;
      } else {
        e.kind = EventKind::kInjection;
      }
      e.member_index = std::stoull(c[3]);
      e.pre_l1 = ParseCell(c[4]);
      e.post_l1 = ParseCell(c[5]);
      e.next_fitness = ParseCell(c[6]);
      if (!c[7].empty()) e.selected = c[7] == "1";
      log.events.push_back(e);
    }
  }

  const auto info_path = runlog_csv.parent_path() / ("runinfo_" + stem + ".csv");
  if (std::filesystem::exists(info_path)) {
    std::istringstream info(ReadFile(info_path));
    std::getline(info, line);
    while (std::getline(info, line)) {
      const auto c = SplitCsvLine(line);
      if (c.size() != 2) continue;
      if (c[0] == "env") log.env = c[1];
      else if (c[0] == "training_frames") log.training_frames = std::stoull(c[1]);
      else if (c[0] == "population_frames") log.population_frames = std::stoull(c[1]);
      else if (c[0] == "agent_frames") log.agent_frames = std::stoull(c[1]);
      else if (c[0] == "evaluation_frames") log.evaluation_frames = std::stoull(c[1]);
      else if (c[0] == "generations") log.generations = std::stoull(c[1]);
      else if (c[0] == "train_steps") log.train_steps = std::stoull(c[1]);
      else if (c[0] == "goal_hits") log.goal_hits = std::stoull(c[1]);
    }
  }
  return log;
}

std::string SummaryCsv(std::span<const SummaryRow> rows) {
  std::string out = "variant,runs,max,mean,median,std_percent\n";
  for (const auto& r : rows) {
    out += r.variant + "," + std::to_string(r.runs) + "," + FormatNumber(r.max) + "," +
           FormatNumber(r.mean) + "," + FormatNumber(r.median) + "," +
           FormatNumber(r.std_percent) + "\n";
  }
  return out;
}

std::string SelectionRateCsv(std::span<const RunLog> logs) {
  std::vector<std::string> order;
  for (const auto& log : logs) {
    if (std::find(order.begin(), order.end(), log.variant) == order.end()) {
      order.push_back(log.variant);
    }
  }
  std::string out = "variant,events,selected_fraction,discarded_fraction\n";
  for (const auto& variant : order) {
    std::vector<RunLog> group;
    for (const auto& log : logs) {
      if (log.variant == variant) group.push_back(log);
    }
    const auto rate = SelectionRateReport(std::span<const RunLog>(group));
    if (!rate) continue;
    out += variant + "," + std::to_string(rate->events) + "," +
           FormatNumber(rate->selected_fraction) + "," + FormatNumber(rate->discarded_fraction) +
           "\n";
  }
  return out;
}

}  // namespace rim::exp
