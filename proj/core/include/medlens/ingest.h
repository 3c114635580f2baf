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

// CSV input and output. Every writer produces byte-identical files for
// identical inputs: rows are emitted in a stable order and reals use the
// shortest decimal that round-trips.

#ifndef MEDLENS_INGEST_H_
#define MEDLENS_INGEST_H_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "medlens/model.h"
#include "medlens/quality.h"

namespace medlens::ingest {

// Column names default to the MIMIC-III CHARTEVENTS/LABEVENTS extract shape.
struct EventFileSchema {
  std::string admission_id = "hadm_id";
  std::string sign_id = "itemid";
  std::string charttime = "charttime";
  std::string value = "valuenum";
  char delimiter = ',';
  std::string time_format = std::string(TimeFormat::kDefaultLayout);
  std::string epoch = std::string(TimeFormat::kDefaultEpoch);

  // Throws UsageError unless all four columns are named and distinct.
  void validate() const;
};

struct AdmissionFileSchema {
  std::string admission_id = "hadm_id";
  std::string discharge_time = "dischtime";
  std::string expire_flag = "hospital_expire_flag";
  char delimiter = ',';
  std::string time_format = std::string(TimeFormat::kDefaultLayout);
  std::string epoch = std::string(TimeFormat::kDefaultEpoch);

  void validate() const;
};

struct ReadReport {
  std::size_t event_rows = 0;
  std::size_t admission_rows = 0;
  std::size_t skipped_events = 0;
  std::size_t skipped_admissions = 0;
  // First few skip reasons, for diagnostics.
  std::vector<std::string> notes;
};

struct CohortRead {
  Cohort cohort;
  ReadReport report;
};

// Rows that cannot be parsed, carry a non-finite or empty value, or name an
// unknown admission are skipped and counted. Throws DataError on a missing
// file, a missing column, or zero parseable admissions.
CohortRead read_cohort(const std::filesystem::path& events_path,
                       const std::filesystem::path& admissions_path,
                       const EventFileSchema& event_schema = {},
                       const AdmissionFileSchema& admission_schema = {});

// Inverse of read_cohort. Events are written in cohort order.
void write_cohort(const Cohort& cohort,
                  const std::filesystem::path& events_path,
                  const std::filesystem::path& admissions_path,
                  const EventFileSchema& event_schema = {},
                  const AdmissionFileSchema& admission_schema = {});

// Header admission_id,sign_id,t0..t{H-1}; missing slots are empty cells;
// rows sorted by admission_id then sign_id. Throws UsageError if the series
// do not share one length.
void write_series_matrix(const std::vector<const SignSeries*>& series,
                         const std::filesystem::path& path);
void write_series_matrix(const SeriesSet& set,
                         const std::filesystem::path& path);

// Reads a matrix written by write_series_matrix. grid_end is not part of
// the format and comes back as zero.
std::vector<SignSeries> read_series_matrix(const std::filesystem::path& path);

// metric_a.csv .. metric_d.csv and pearson.csv (sorted by |r| descending,
// undefined last) inside `dir`, which is created if needed.
void write_quality_report(const quality::QualityReport& report,
                          const std::filesystem::path& dir);

void write_histogram(const quality::Histogram& histogram,
                     const std::filesystem::path& path);

// Shortest decimal that round-trips; integral values keep a trailing ".0".
std::string format_double(double v);

// Opens for writing or throws UsageError naming the path.
std::ofstream open_output(const std::filesystem::path& path);

// Splits one CSV record honoring double quotes.
std::vector<std::string> split_csv_line(std::string_view line, char delimiter);

// Quotes a field if it contains the delimiter, a quote, or a newline.
std::string csv_field(std::string_view field, char delimiter = ',');

}  // namespace medlens::ingest

#endif  // MEDLENS_INGEST_H_
