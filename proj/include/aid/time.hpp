#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace aid {

// All timestamps are UTC with one-second resolution.
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;
using Minutes = std::chrono::minutes;

// Elapsed time as fractional minutes, the unit the insulin curve works in.
inline double minutes_between(Timestamp from, Timestamp to) {
  return static_cast<double>((to - from).count()) / 60.0;
}

inline double to_minutes(Seconds d) { return static_cast<double>(d.count()) / 60.0; }

// YYYY-MM-DDThh:mm:ssZ
std::string format_utc(Timestamp t);

// Accepts exactly YYYY-MM-DDThh:mm:ssZ. Anything else (offsets, fractional
// seconds, missing 'Z') throws std::invalid_argument.
Timestamp parse_utc(std::string_view text);

// YYYY-MM-DD of the UTC calendar day containing t.
std::string format_utc_date(Timestamp t);

}  // namespace aid
