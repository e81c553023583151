#include "signalbench/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace signalbench {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

[[noreturn]] void bad_line(const char* what, int line_no) {
  throw std::runtime_error(std::string("csv: ") + what + " on line " + std::to_string(line_no));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream row(line);
  while (std::getline(row, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

int peak_queue(const EpisodeLog& log) {
  if (log.records.empty()) throw std::invalid_argument("peak_queue of an empty log");
  int peak = 0;
  for (const StepRecord& r : log.records) peak = std::max(peak, r.total_queue);
  return peak;
}

double fraction_above_half(const EpisodeLog& log) {
  int peak = peak_queue(log);  // throws on empty
  if (peak == 0) return 0.0;
  double half = static_cast<double>(peak) / 2.0;
  std::size_t above = 0;
  for (const StepRecord& r : log.records)
    if (static_cast<double>(r.total_queue) > half) ++above;
  return static_cast<double>(above) / static_cast<double>(log.records.size());
}

std::int64_t total_wait(const EpisodeLog& log) {
  if (log.records.empty()) throw std::invalid_argument("total_wait of an empty log");
  return log.records.back().cum_wait;
}

std::vector<SummaryRow> summarize(const std::vector<EpisodeLog>& logs) {
  std::vector<SummaryRow> rows;
  std::vector<int> counts;
  for (const EpisodeLog& log : logs) {
    std::size_t i = 0;
    for (; i < rows.size(); ++i)
      if (rows[i].controller == log.controller && rows[i].scenario == log.scenario) break;
    if (i == rows.size()) {
      rows.push_back({log.controller, log.scenario, 0.0, 0.0, 0.0});
      counts.push_back(0);
    }
    rows[i].peak_queue += static_cast<double>(peak_queue(log));
    rows[i].fraction_above_half += fraction_above_half(log);
    rows[i].total_wait += static_cast<double>(total_wait(log));
    ++counts[i];
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].peak_queue /= counts[i];
    rows[i].fraction_above_half /= counts[i];
    rows[i].total_wait /= counts[i];
  }
  return rows;
}

void write_step_csv(std::ostream& out, const EpisodeLog& log) {
  out << "step,total_queue,queue_N,queue_E,queue_S,queue_W,cum_wait,phase\n";
  for (const StepRecord& r : log.records) {
    out << r.step << ',' << r.total_queue << ',' << r.queue[0] << ',' << r.queue[1] << ','
        << r.queue[2] << ',' << r.queue[3] << ',' << r.cum_wait << ',' << r.phase << '\n';
  }
  if (!out) throw std::runtime_error("step csv write failed");
}

void write_step_csv(const std::filesystem::path& path, const EpisodeLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_step_csv(out, log);
}

EpisodeLog read_step_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("step csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "step,total_queue,queue_N,queue_E,queue_S,queue_W,cum_wait,phase")
    throw std::runtime_error("step csv: unexpected header");

  EpisodeLog log;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_fields(line);
    if (f.size() != 8) bad_line("wrong field count", line_no);
    StepRecord r;
    try {
      r.step = std::stoi(f[0]);
      r.total_queue = std::stoi(f[1]);
      for (int a = 0; a < 4; ++a) r.queue[a] = std::stoi(f[2 + a]);
      r.cum_wait = std::stoll(f[6]);
    } catch (const std::exception&) {
      bad_line("bad number", line_no);
    }
    r.phase = f[7];
    log.records.push_back(r);
  }
  return log;
}

EpisodeLog read_step_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_step_csv(in);
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "controller,scenario,peak_queue,fraction_above_half,total_wait\n";
  for (const SummaryRow& r : rows) {
    out << r.controller << ',' << scenario_name(r.scenario) << ',' << format_real(r.peak_queue)
        << ',' << format_real(r.fraction_above_half) << ',' << format_real(r.total_wait) << '\n';
  }
  if (!out) throw std::runtime_error("summary csv write failed");
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_summary_csv(out, rows);
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("summary csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "controller,scenario,peak_queue,fraction_above_half,total_wait")
    throw std::runtime_error("summary csv: unexpected header");

  std::vector<SummaryRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_fields(line);
    if (f.size() != 5) bad_line("wrong field count", line_no);
    SummaryRow r;
    r.controller = f[0];
    if (f[1].size() != 6 || f[1].rfind("SCEN-", 0) != 0) bad_line("bad scenario", line_no);
    r.scenario = scenario_from_int(f[1][5] - '0');
    try {
      r.peak_queue = std::stod(f[2]);
      r.fraction_above_half = std::stod(f[3]);
      r.total_wait = std::stod(f[4]);
    } catch (const std::exception&) {
      bad_line("bad number", line_no);
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_summary_csv(in);
}

}  // namespace signalbench
