#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace voicesearch {

using Clock = std::chrono::system_clock;
using Timestamp = std::chrono::time_point<Clock, std::chrono::milliseconds>;

Timestamp now_ms();

// "2026-10-16T13:09:00.123Z"
std::string format_rfc3339(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff...](Z|±HH:MM)". Throws
// Error(malformed_request) otherwise.
Timestamp parse_rfc3339(std::string_view text);

}  // namespace voicesearch
