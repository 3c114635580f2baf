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

#include "medlens/timestamp.h"

#include <chrono>
#include <cstdio>

#include "medlens/error.h"

namespace medlens {
namespace {

constexpr std::int64_t kMinutesPerDay = 24 * kMinutesPerHour;

bool read_digits(std::string_view text, std::size_t& pos, int width,
                 int& out) {
  if (pos + width > text.size()) return false;
  int v = 0;
  for (int i = 0; i < width; ++i) {
    const char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += width;
  out = v;
  return true;
}

// Floor division for negative minute counts.
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

TimeFormat::TimeFormat() : TimeFormat(std::string(kDefaultLayout)) {}

TimeFormat::TimeFormat(std::string layout, std::string_view epoch)
    : layout_(std::move(layout)) {
  for (std::size_t i = 0; i < layout_.size(); ++i) {
    if (layout_[i] != '%') continue;
    if (i + 1 >= layout_.size()) {
      throw UsageError("time format ends with a bare '%'");
    }
    const char d = layout_[++i];
    if (d != 'Y' && d != 'm' && d != 'd' && d != 'H' && d != 'M' &&
        d != 'S' && d != '%') {
      throw UsageError(std::string("unsupported time format directive %") +
                       d);
    }
  }
  const auto e = parse_with(kDefaultLayout, epoch);
  if (!e) {
    throw UsageError("epoch '" + std::string(epoch) +
                     "' is not of the form YYYY-MM-DD HH:MM:SS");
  }
  epoch_unix_minutes_ = *e;
}

std::optional<std::int64_t> TimeFormat::parse_unix_minutes(
    std::string_view text) const {
  return parse_with(layout_, text);
}

std::optional<std::int64_t> TimeFormat::parse_with(std::string_view layout,
                                                   std::string_view text) {
  int year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const char c = layout[i];
    if (c != '%') {
      if (pos >= text.size() || text[pos] != c) return std::nullopt;
      ++pos;
      continue;
    }
    const char d = layout[++i];
    bool ok = true;
    switch (d) {
      case 'Y': ok = read_digits(text, pos, 4, year); break;
      case 'm': ok = read_digits(text, pos, 2, month); break;
      case 'd': ok = read_digits(text, pos, 2, day); break;
      case 'H': ok = read_digits(text, pos, 2, hour); break;
      case 'M': ok = read_digits(text, pos, 2, minute); break;
      case 'S': ok = read_digits(text, pos, 2, second); break;
      case '%':
        ok = pos < text.size() && text[pos] == '%';
        ++pos;
        break;
      default: ok = false;
    }
    if (!ok) return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;

  const std::chrono::year_month_day ymd{
      std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
      std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  const std::int64_t days =
      std::chrono::sys_days{ymd}.time_since_epoch().count();
  return days * kMinutesPerDay + hour * kMinutesPerHour + minute +
         (second > 0 ? 1 : 0);
}

std::optional<Timestamp> TimeFormat::parse(std::string_view text) const {
  const auto m = parse_unix_minutes(text);
  if (!m) return std::nullopt;
  return Timestamp{*m - epoch_unix_minutes_};
}

std::string TimeFormat::format(Timestamp t) const {
  const std::int64_t unix_minutes = t.minutes + epoch_unix_minutes_;
  const std::int64_t days = floor_div(unix_minutes, kMinutesPerDay);
  const std::int64_t in_day = unix_minutes - days * kMinutesPerDay;
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{days}}};

  std::string out;
  out.reserve(layout_.size() + 8);
  char buf[16];
  for (std::size_t i = 0; i < layout_.size(); ++i) {
    const char c = layout_[i];
    if (c != '%') {
      out.push_back(c);
      continue;
    }
    const char d = layout_[++i];
    switch (d) {
      case 'Y':
        std::snprintf(buf, sizeof buf, "%04d", static_cast<int>(ymd.year()));
        break;
      case 'm':
        std::snprintf(buf, sizeof buf, "%02u",
                      static_cast<unsigned>(ymd.month()));
        break;
      case 'd':
        std::snprintf(buf, sizeof buf, "%02u",
                      static_cast<unsigned>(ymd.day()));
        break;
      case 'H':
        std::snprintf(buf, sizeof buf, "%02d",
                      static_cast<int>(in_day / kMinutesPerHour));
        break;
      case 'M':
        std::snprintf(buf, sizeof buf, "%02d",
                      static_cast<int>(in_day % kMinutesPerHour));
        break;
      case 'S': std::snprintf(buf, sizeof buf, "00"); break;
      default: std::snprintf(buf, sizeof buf, "%%"); break;
    }
    out += buf;
  }
  return out;
}

}  // namespace medlens
