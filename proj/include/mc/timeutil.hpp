#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>

namespace mc {

// All instants are UTC with seconds granularity.
using Instant = std::chrono::sys_seconds;

// "Sun, 20 Jan 2002 14:25:10 GMT"
std::optional<Instant> parse_rfc1123(const std::string& s);

// "20020120142510" with calendar validation.
std::optional<Instant> parse_stamp14(const std::string& s);

std::string format_rfc1123(Instant t);
std::string format_stamp14(Instant t);

int utc_year(Instant t);

}  // namespace mc
