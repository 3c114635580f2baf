// Copyright 2026 The MedLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "medlens/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "medlens/error.h"

namespace medlens::ingest {
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxNotes = 10;

void note(ReadReport& report, std::string message) {
  if (report.notes.size() < kMaxNotes) report.notes.push_back(std::move(message));
}

void require_distinct(const std::vector<std::string>& names,
                      std::string_view what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw UsageError(std::string(what) + ": empty column name");
    if (!seen.insert(n).second) {
      throw UsageError(std::string(what) + ": column '" + n +
                       "' named twice");
    }
  }
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

bool read_record(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name, const fs::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError("'" + path.string() + "' lacks column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

void EventFileSchema::validate() const {
  require_distinct({admission_id, sign_id, charttime, value}, "event schema");
}

void AdmissionFileSchema::validate() const {
  require_distinct({admission_id, discharge_time, expire_flag},
                   "admission schema");
}

std::vector<std::string> split_csv_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_field(std::string_view field, char delimiter) {
  if (field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) ==
      std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) {
    s += ".0";
  }
  return s;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  return out;
}

CohortRead read_cohort(const fs::path& events_path,
                       const fs::path& admissions_path,
                       const EventFileSchema& event_schema,
                       const AdmissionFileSchema& admission_schema) {
  event_schema.validate();
  admission_schema.validate();
  const TimeFormat event_time(event_schema.time_format, event_schema.epoch);
  const TimeFormat admission_time(admission_schema.time_format,
                                  admission_schema.epoch);

  CohortRead result;
  Cohort& cohort = result.cohort;
  ReadReport& report = result.report;

  std::unordered_map<std::string, std::uint32_t> admission_index;
  {
    auto in = open_input(admissions_path);
    std::string line;
    if (!read_record(in, line)) {
      throw DataError("'" + admissions_path.string() + "' is empty");
    }
    const auto header = split_csv_line(line, admission_schema.delimiter);
    const auto c_id = column_index(header, admission_schema.admission_id,
                                   admissions_path);
    const auto c_time = column_index(header, admission_schema.discharge_time,
                                     admissions_path);
    const auto c_flag =
        column_index(header, admission_schema.expire_flag, admissions_path);
    const std::size_t need = std::max({c_id, c_time, c_flag}) + 1;

    std::size_t row = 1;
    while (read_record(in, line)) {
      ++row;
      if (line.empty()) continue;
      ++report.admission_rows;
      const auto f = split_csv_line(line, admission_schema.delimiter);
      AdmissionRecord rec;
      const auto when = f.size() >= need
                            ? admission_time.parse(trim(f[c_time]))
                            : std::nullopt;
      if (f.size() < need || trim(f[c_id]).empty() || !when ||
          !parse_int(f[c_flag], rec.expire_flag) ||
          (rec.expire_flag != 0 && rec.expire_flag != 1)) {
        ++report.skipped_admissions;
        note(report, admissions_path.filename().string() + ":" +
                         std::to_string(row) + ": unparseable admission row");
        continue;
      }
      rec.admission_id = std::string(trim(f[c_id]));
      rec.discharge_time = *when;
      const auto index = static_cast<std::uint32_t>(cohort.admissions.size());
      if (!admission_index.emplace(rec.admission_id, index).second) {
        ++report.skipped_admissions;
        note(report, admissions_path.filename().string() + ":" +
                         std::to_string(row) + ": duplicate admission '" +
                         rec.admission_id + "'");
        continue;
      }
      cohort.admissions.push_back(std::move(rec));
    }
  }
  if (cohort.admissions.empty()) {
    throw DataError("no parseable admissions in '" +
                    admissions_path.string() + "'");
  }

  std::unordered_map<std::string, std::uint32_t> provisional_sign;
  std::vector<std::string> sign_names;
  {
    auto in = open_input(events_path);
    std::string line;
    if (!read_record(in, line)) {
      throw DataError("'" + events_path.string() + "' is empty");
    }
    const auto header = split_csv_line(line, event_schema.delimiter);
    const auto c_adm =
        column_index(header, event_schema.admission_id, events_path);
    const auto c_sign = column_index(header, event_schema.sign_id, events_path);
    const auto c_time =
        column_index(header, event_schema.charttime, events_path);
    const auto c_value = column_index(header, event_schema.value, events_path);
    const std::size_t need = std::max({c_adm, c_sign, c_time, c_value}) + 1;

    std::size_t row = 1;
    while (read_record(in, line)) {
      ++row;
      if (line.empty()) continue;
      ++report.event_rows;
      const auto f = split_csv_line(line, event_schema.delimiter);
      auto skip = [&](std::string_view why) {
        ++report.skipped_events;
        note(report, events_path.filename().string() + ":" +
                         std::to_string(row) + ": " + std::string(why));
      };
      if (f.size() < need) {
        skip("too few columns");
        continue;
      }
      double value = 0.0;
      if (!parse_double(f[c_value], value) || !std::isfinite(value)) {
        skip("missing or non-finite value");
        continue;
      }
      const auto when = event_time.parse(trim(f[c_time]));
      if (!when) {
        skip("unparseable charttime");
        continue;
      }
      const auto adm = admission_index.find(std::string(trim(f[c_adm])));
      if (adm == admission_index.end()) {
        skip("unknown admission");
        continue;
      }
      const std::string sign(trim(f[c_sign]));
      if (sign.empty()) {
        skip("empty sign id");
        continue;
      }
      auto [it, inserted] = provisional_sign.emplace(
          sign, static_cast<std::uint32_t>(sign_names.size()));
      if (inserted) sign_names.push_back(sign);
      cohort.events.push_back(SignEvent{adm->second, it->second, *when, value});
    }
  }

  // Catalog order is lexicographic by sign id.
  std::vector<std::uint32_t> order(sign_names.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return sign_names[a] < sign_names[b];
  });
  std::vector<std::uint32_t> remap(sign_names.size());
  cohort.signs.reserve(sign_names.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    remap[order[i]] = i;
    cohort.signs.push_back(SignInfo{sign_names[order[i]], 0});
  }
  for (auto& e : cohort.events) e.sign = remap[e.sign];
  cohort.recount_signs();
  return result;
}

void write_cohort(const Cohort& cohort, const fs::path& events_path,
                  const fs::path& admissions_path,
                  const EventFileSchema& event_schema,
                  const AdmissionFileSchema& admission_schema) {
  event_schema.validate();
  admission_schema.validate();
  const TimeFormat event_time(event_schema.time_format, event_schema.epoch);
  const TimeFormat admission_time(admission_schema.time_format,
                                  admission_schema.epoch);
  {
    const char d = admission_schema.delimiter;
    auto out = open_output(admissions_path);
    out << csv_field(admission_schema.admission_id, d) << d
        << csv_field(admission_schema.discharge_time, d) << d
        << csv_field(admission_schema.expire_flag, d) << '\n';
    for (const auto& a : cohort.admissions) {
      out << csv_field(a.admission_id, d) << d
          << admission_time.format(a.discharge_time) << d << a.expire_flag
          << '\n';
    }
    if (!out) throw UsageError("write failed: " + admissions_path.string());
  }
  {
    const char d = event_schema.delimiter;
    auto out = open_output(events_path);
    out << csv_field(event_schema.admission_id, d) << d
        << csv_field(event_schema.sign_id, d) << d
        << csv_field(event_schema.charttime, d) << d
        << csv_field(event_schema.value, d) << '\n';
    std::string buf;
    for (const auto& e : cohort.events) {
      buf.clear();
      buf += csv_field(cohort.admissions.at(e.admission).admission_id, d);
      buf += d;
      buf += csv_field(cohort.signs.at(e.sign).sign_id, d);
      buf += d;
      buf += event_time.format(e.charttime);
      buf += d;
      buf += format_double(e.value);
      buf += '\n';
      out << buf;
    }
    if (!out) throw UsageError("write failed: " + events_path.string());
  }
}

void write_series_matrix(const std::vector<const SignSeries*>& series,
                         const fs::path& path) {
  std::size_t hours = 0;
  if (!series.empty()) hours = series.front()->size();
  for (const auto* s : series) {
    if (s->size() != hours) {
      throw UsageError("series matrix rows must share one length");
    }
  }
  std::vector<const SignSeries*> rows = series;
  std::sort(rows.begin(), rows.end(),
            [](const SignSeries* a, const SignSeries* b) {
              if (a->admission_id() != b->admission_id()) {
                return a->admission_id() < b->admission_id();
              }
              return a->sign_id() < b->sign_id();
            });

  auto out = open_output(path);
  std::string buf = "admission_id,sign_id";
  for (std::size_t t = 0; t < hours; ++t) {
    buf += ",t";
    buf += std::to_string(t);
  }
  buf += '\n';
  out << buf;
  for (const auto* s : rows) {
    buf.clear();
    buf += csv_field(s->admission_id());
    buf += ',';
    buf += csv_field(s->sign_id());
    for (std::size_t t = 0; t < hours; ++t) {
      buf += ',';
      if (s->observed(t)) buf += format_double(s->value(t));
    }
    buf += '\n';
    out << buf;
  }
  if (!out) throw UsageError("write failed: " + path.string());
}

void write_series_matrix(const SeriesSet& set, const fs::path& path) {
  std::vector<const SignSeries*> rows;
  rows.reserve(set.series.size());
  for (const auto& s : set.series) rows.push_back(&s);
  write_series_matrix(rows, path);
}

std::vector<SignSeries> read_series_matrix(const fs::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!read_record(in, line)) throw DataError("'" + path.string() + "' is empty");
  const auto header = split_csv_line(line, ',');
  if (header.size() < 2 || header[0] != "admission_id" ||
      header[1] != "sign_id") {
    throw DataError("'" + path.string() + "' is not a series matrix");
  }
  const std::size_t hours = header.size() - 2;
  std::vector<SignSeries> out;
  std::size_t row = 1;
  while (read_record(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line, ',');
    if (f.size() != hours + 2) {
      throw DataError(path.string() + ":" + std::to_string(row) +
                      ": expected " + std::to_string(hours + 2) + " cells");
    }
    SignSeries s(f[0], f[1], Timestamp{}, hours);
    for (std::size_t t = 0; t < hours; ++t) {
      if (f[t + 2].empty()) continue;
      double v = 0.0;
      if (!parse_double(f[t + 2], v) || !std::isfinite(v)) {
        throw DataError(path.string() + ":" + std::to_string(row) +
                        ": bad value in slot " + std::to_string(t));
      }
      s.set(t, v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_quality_report(const quality::QualityReport& report,
                          const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);

  auto write_sign_rates = [&](const std::vector<quality::SignRate>& rates,
                              const char* name) {
    auto out = open_output(dir / name);
    out << "sign_id,missing_rate\n";
    for (const auto& r : rates) {
      out << csv_field(r.sign_id) << ',' << format_double(r.missing_rate)
          << '\n';
    }
  };
  auto write_admission_rates =
      [&](const std::vector<quality::AdmissionRate>& rates, const char* name) {
        auto out = open_output(dir / name);
        out << "admission_id,missing_rate\n";
        for (const auto& r : rates) {
          out << csv_field(r.admission_id) << ','
              << format_double(r.missing_rate) << '\n';
        }
      };
  write_sign_rates(report.metric_a, "metric_a.csv");
  write_sign_rates(report.metric_b, "metric_b.csv");
  write_admission_rates(report.metric_c, "metric_c.csv");
  write_admission_rates(report.metric_d, "metric_d.csv");

  std::vector<const quality::PearsonScore*> sorted;
  for (const auto& p : report.pearson) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const quality::PearsonScore* a, const quality::PearsonScore* b) {
              if (a->r.has_value() != b->r.has_value()) return a->r.has_value();
              if (a->r && std::abs(*a->r) != std::abs(*b->r)) {
                return std::abs(*a->r) > std::abs(*b->r);
              }
              return a->sign_id < b->sign_id;
            });
  auto out = open_output(dir / "pearson.csv");
  out << "sign_id,r,abs_r,n_pairs\n";
  for (const auto* p : sorted) {
    out << csv_field(p->sign_id) << ',';
    if (p->r) out << format_double(*p->r) << ',' << format_double(std::abs(*p->r));
    else out << ',';
    out << ',' << p->n_pairs << '\n';
  }
  if (!out) throw UsageError("write failed: " + (dir / "pearson.csv").string());
}

void write_histogram(const quality::Histogram& histogram, const fs::path& path) {
  auto out = open_output(path);
  out << "bin_lo,bin_hi,count\n";
  for (const auto& b : histogram.bins) {
    out << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count
        << '\n';
  }
  out << "undefined,," << histogram.undefined << '\n';
  if (!out) throw UsageError("write failed: " + path.string());
}

}  // namespace medlens::ingest
