#include "stressnet/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace stressnet {

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) fail(ErrorKind::IoError, path + ": bad number '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::IoError, path + ": bad number '" + s + "'");
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void write_lines(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) fail(ErrorKind::IoError, "write failed: " + path.string());
}

}  // namespace

void write_signal_csv(const std::filesystem::path& path, const Signal& sig) {
  sig.validate();
  std::string out = "t_seconds,value\n";
  for (std::size_t i = 0; i < sig.size(); ++i) {
    out += format_number(sig.time_of(i));
    out += ',';
    out += format_number(sig.samples[i]);
    out += '\n';
  }
  write_lines(path, out);
}

Signal read_signal_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  const std::string p = path.string();
  if (lines.empty()) fail(ErrorKind::IoError, p + ": empty file");
  if (lines[0] != "t_seconds,value") {
    fail(ErrorKind::IoError, p + ": expected header t_seconds,value");
  }
  std::vector<double> times, values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_fields(lines[i]);
    if (f.size() != 2) fail(ErrorKind::IoError, p + ": expected 2 fields per line");
    times.push_back(parse_double(f[0], p));
    values.push_back(parse_double(f[1], p));
  }
  if (times.size() < 2) fail(ErrorKind::IoError, p + ": need at least 2 samples");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) fail(ErrorKind::IoError, p + ": timestamps must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    double gap = times[i] - times[i - 1];
    if (std::abs(gap - dt) > 1e-6 * dt) {
      fail(ErrorKind::IoError, p + ": non-uniform sampling");
    }
  }
  Signal sig;
  sig.samples = std::move(values);
  sig.sample_rate_hz = 1.0 / dt;
  sig.t0_seconds = times[0];
  return sig;
}

void write_events_csv(const std::filesystem::path& path, const EventSeries& events) {
  events.validate();
  std::string out = "t_seconds\n";
  for (double t : events.times_s) {
    out += format_number(t);
    out += '\n';
  }
  write_lines(path, out);
}

EventSeries read_events_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  const std::string p = path.string();
  if (lines.empty()) fail(ErrorKind::IoError, p + ": empty file");
  if (lines[0] != "t_seconds") fail(ErrorKind::IoError, p + ": expected header t_seconds");
  EventSeries out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    out.times_s.push_back(parse_double(lines[i], p));
  }
  out.validate();
  return out;
}

std::vector<ScoredLabel> read_scores_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  const std::string p = path.string();
  if (lines.empty()) fail(ErrorKind::IoError, p + ": empty file");
  if (lines[0] != "score,label") fail(ErrorKind::IoError, p + ": expected header score,label");
  std::vector<ScoredLabel> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_fields(lines[i]);
    if (f.size() != 2) fail(ErrorKind::IoError, p + ": expected 2 fields per line");
    ScoredLabel sl;
    sl.score = parse_double(f[0], p);
    if (f[1] == "1") {
      sl.positive = true;
    } else if (f[1] == "0") {
      sl.positive = false;
    } else {
      fail(ErrorKind::IoError, p + ": label must be 0 or 1");
    }
    out.push_back(sl);
  }
  return out;
}

void write_phases_csv(const std::filesystem::path& path, const std::vector<Phase>& phases) {
  std::string out = "name,start_s,end_s\n";
  for (const Phase& ph : phases) {
    out += ph.name + "," + format_number(ph.start_s) + "," + format_number(ph.end_s) + "\n";
  }
  write_lines(path, out);
}

std::vector<Phase> read_phases_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  const std::string p = path.string();
  if (lines.empty() || lines[0] != "name,start_s,end_s") {
    fail(ErrorKind::IoError, p + ": expected header name,start_s,end_s");
  }
  std::vector<Phase> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_fields(lines[i]);
    if (f.size() != 3) fail(ErrorKind::IoError, p + ": expected 3 fields per line");
    out.push_back({f[0], parse_double(f[1], p), parse_double(f[2], p)});
  }
  return out;
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c == name) return true;
  }
  return false;
}

const std::string& CsvTable::field(std::size_t row, const std::string& column) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == column) return rows[row][c];
  }
  fail(ErrorKind::IoError, "missing column " + column);
}

CsvTable read_table_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty()) fail(ErrorKind::IoError, path.string() + ": empty file");
  CsvTable t;
  t.columns = split_fields(lines[0]);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_fields(lines[i]);
    if (f.size() != t.columns.size()) {
      fail(ErrorKind::IoError, path.string() + ": ragged row " + std::to_string(i));
    }
    t.rows.push_back(std::move(f));
  }
  return t;
}

void write_table_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += row[c];
    }
    out += '\n';
  }
  write_lines(path, out);
}

}  // namespace stressnet
