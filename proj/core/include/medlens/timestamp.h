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

#ifndef MEDLENS_TIMESTAMP_H_
#define MEDLENS_TIMESTAMP_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace medlens {

inline constexpr std::int64_t kMinutesPerHour = 60;

// Absolute time as whole minutes since an epoch chosen by the reader.
struct Timestamp {
  std::int64_t minutes = 0;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;

  constexpr Timestamp plus_hours(std::int64_t hours) const {
    return Timestamp{minutes + hours * kMinutesPerHour};
  }
};

// Smallest whole hour >= t.
constexpr Timestamp ceil_to_hour(Timestamp t) {
  std::int64_t q = t.minutes / kMinutesPerHour;
  if (q * kMinutesPerHour < t.minutes) ++q;
  return Timestamp{q * kMinutesPerHour};
}

// strftime-like layout restricted to %Y %m %d %H %M %S and literal
// characters. The epoch is always written in the default layout.
//
// Seconds are rounded UP to the next minute when parsing, so an event at
// 10:00:30 stays strictly after 10:00 and lands in the hour ending 11:00.
class TimeFormat {
 public:
  static constexpr std::string_view kDefaultLayout = "%Y-%m-%d %H:%M:%S";
  static constexpr std::string_view kDefaultEpoch = "1970-01-01 00:00:00";

  TimeFormat();
  // Throws UsageError on an unsupported directive or unparseable epoch.
  explicit TimeFormat(std::string layout,
                      std::string_view epoch = kDefaultEpoch);

  std::optional<Timestamp> parse(std::string_view text) const;
  std::string format(Timestamp t) const;

  const std::string& layout() const { return layout_; }

 private:
  std::optional<std::int64_t> parse_unix_minutes(std::string_view text) const;
  static std::optional<std::int64_t> parse_with(std::string_view layout,
                                                std::string_view text);

  std::string layout_;
  std::int64_t epoch_unix_minutes_ = 0;
};

}  // namespace medlens

#endif  // MEDLENS_TIMESTAMP_H_
