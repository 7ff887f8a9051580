#include "viral/timestamp.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace viral {
namespace {

bool read_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return res.ec == std::errc{};
}

}  // namespace

std::optional<Timestamp> parse_iso8601_utc(std::string_view s) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (s.size() < 19) return std::nullopt;
  if (!read_fixed(s, 0, 4, year) || s[4] != '-' || !read_fixed(s, 5, 2, month) ||
      s[7] != '-' || !read_fixed(s, 8, 2, day) || (s[10] != 'T' && s[10] != ' ') ||
      !read_fixed(s, 11, 2, hour) || s[13] != ':' || !read_fixed(s, 14, 2, minute) ||
      s[16] != ':' || !read_fixed(s, 17, 2, second)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      ++pos;
      ++digits;
    }
    if (digits == 0) return std::nullopt;
  }
  std::string_view zone = s.substr(pos);
  if (zone != "Z" && zone != "+00:00" && zone != "+0000") return std::nullopt;

  if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days_since_epoch) * kSecondsPerDay + hour * 3600 + minute * 60 +
         second;
}

std::string format_iso8601_utc(Timestamp ts) {
  using namespace std::chrono;
  const Timestamp day_start = floor_to_day(ts);
  const Timestamp secs = ts - day_start;
  const year_month_day ymd{sys_days{days{day_start / kSecondsPerDay}}};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

Timestamp floor_to_day(Timestamp ts) {
  Timestamp q = ts / kSecondsPerDay;
  if (ts % kSecondsPerDay < 0) --q;
  return q * kSecondsPerDay;
}

}  // namespace viral
