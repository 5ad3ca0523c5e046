#include "wifipoi/timeutil.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "wifipoi/error.hpp"

namespace wifipoi {
namespace {

int parse_fixed(std::string_view text, std::string_view whole) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ConfigParse, "bad number in '" + std::string(whole) + "'");
  }
  return value;
}

Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Timestamp parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorCode::ConfigParse, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{parse_fixed(text.substr(0, 4), text)},
                           month{static_cast<unsigned>(parse_fixed(text.substr(5, 2), text))},
                           day{static_cast<unsigned>(parse_fixed(text.substr(8, 2), text))}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::ConfigParse, "invalid date '" + std::string(text) + "'");
  }
  return sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay;
}

std::string format_date(Timestamp t, Timestamp utc_offset) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{floor_div(t + utc_offset, kSecondsPerDay)}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

DayWindow day_window(std::string_view date, Timestamp utc_offset) {
  const Timestamp begin = parse_date(date) - utc_offset;
  return {begin, begin + kSecondsPerDay};
}

std::string format_hhmm(Timestamp t, Timestamp utc_offset) {
  const Timestamp local = t + utc_offset;
  const Timestamp seconds_of_day = local - floor_div(local, kSecondsPerDay) * kSecondsPerDay;
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(seconds_of_day / 3600),
                static_cast<int>((seconds_of_day % 3600) / 60));
  return buf;
}

int parse_hhmm(std::string_view text) {
  if (text.size() != 5 || text[2] != ':') {
    throw Error(ErrorCode::ConfigParse, "expected HH:mm, got '" + std::string(text) + "'");
  }
  const int hours = parse_fixed(text.substr(0, 2), text);
  const int minutes = parse_fixed(text.substr(3, 2), text);
  if (hours > 23 || minutes > 59) {
    throw Error(ErrorCode::ConfigParse, "time out of range '" + std::string(text) + "'");
  }
  return hours * 60 + minutes;
}

}  // namespace wifipoi
