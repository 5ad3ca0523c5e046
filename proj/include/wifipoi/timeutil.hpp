#pragma once

#include <string>
#include <string_view>

#include "wifipoi/model.hpp"

namespace wifipoi {

inline constexpr Timestamp kSecondsPerDay = 86400;

/// Half-open [begin, end) range of epoch seconds covering one local day.
struct DayWindow {
  Timestamp begin = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const noexcept { return t >= begin && t < end; }
};

/// "YYYY-MM-DD" -> epoch seconds of 00:00 UTC that day. Throws ConfigParse.
Timestamp parse_date(std::string_view text);

/// Epoch seconds -> "YYYY-MM-DD" (UTC, after applying the offset).
std::string format_date(Timestamp t, Timestamp utc_offset = 0);

/// Local day given a fixed UTC offset in seconds (e.g. +28800 for UTC+8).
DayWindow day_window(std::string_view date, Timestamp utc_offset = 0);

/// "HH:mm" wall-clock rendering.
std::string format_hhmm(Timestamp t, Timestamp utc_offset = 0);

/// "HH:mm" -> minutes after midnight. Throws ConfigParse.
int parse_hhmm(std::string_view text);

}  // namespace wifipoi
