#ifndef VIRAL_TIMESTAMP_HPP
#define VIRAL_TIMESTAMP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace viral {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;

// Accepts `YYYY-MM-DDTHH:MM:SS` followed by optional fractional seconds
// (truncated) and a `Z`, `+00:00` or `+0000` suffix. Anything else,
// including non-UTC offsets and out-of-range fields, yields nullopt.
std::optional<Timestamp> parse_iso8601_utc(std::string_view text);

// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_iso8601_utc(Timestamp ts);

// Start of the UTC day containing ts.
Timestamp floor_to_day(Timestamp ts);

}  // namespace viral

#endif  // VIRAL_TIMESTAMP_HPP
